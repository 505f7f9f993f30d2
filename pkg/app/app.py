#!/usr/bin/env python
# -*- coding: utf-8 -*-

import argparse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from viaa.configuration import ConfigParser
from viaa.observability import logging

from app.helpers.complex import build_rips
from app.helpers.exceptions import InvalidParameter, PSLException
from app.helpers.filtration_parser import parse_filtration_file
from app.helpers.laplacian import RANK_TOL
from app.helpers.points_parser import (
    LabeledPointCloud,
    parse_points_csv,
    parse_pqr,
    scale_charges,
)
from app.helpers.records_csv import write_records_csv, write_spectra_json
from app.helpers.sheaf import WEIGHTS, SheafSpec
from app.helpers.spectra import TOL_ZERO, PSLRecord, sign_flip_report, sweep
from app.helpers.svg_builder import CHANNELS, NoData, emit_svg

FORMATS = ("csv", "pqr", "filtration")
SOURCES = ("rips", "import")
SHEAVES = ("constant", "labeled")


class InputError(PSLException):
    """Exception raised when an input file cannot be read."""

    exit_code = 3


class OutputError(PSLException):
    """Exception raised when an output file cannot be written."""

    exit_code = 3


def parse_tgrid(value) -> List[float]:
    """Parses "min:max:steps" (an evenly spaced grid) or a comma list."""
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    text = str(value).strip()
    try:
        if ":" in text:
            low, high, steps = text.split(":")
            grid = np.linspace(float(low), float(high), int(steps))
            return [float(v) for v in np.round(grid, 12)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidParameter(
            f"Cannot parse t grid '{text}', use 'min:max:steps' or a comma list",
            tgrid=text,
        )


def parse_list(value, cast) -> list:
    if isinstance(value, (list, tuple)):
        return [cast(v) for v in value]
    try:
        return [cast(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise InvalidParameter(f"Cannot parse list '{value}'", value=str(value))


@dataclass
class RunConfig:
    """Everything one run needs; flags override the config file."""

    input: Path
    t_grid: List[float]
    format: str = "csv"
    filtration: str = "rips"
    r_max: Optional[float] = None
    dim_max: int = 2
    sheaf: str = "labeled"
    weight: str = "default"
    qs: List[int] = field(default_factory=lambda: [0, 1])
    p_list: List[float] = field(default_factory=lambda: [0.0])
    tol_zero: float = TOL_ZERO
    rank_tol: float = RANK_TOL
    scale_charges: bool = False
    drop_zero_charge: bool = False
    points: Optional[Path] = None
    out_csv: Optional[Path] = None
    out_svg: Optional[Path] = None
    dump_spectra: bool = False
    sign_flip_report: bool = False
    jobs: int = 1

    def __post_init__(self):
        if not self.t_grid:
            raise InvalidParameter("The t grid is empty")
        if any(a > b for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise InvalidParameter("The t grid must be sorted", t_grid=self.t_grid)
        if any(p < 0 for p in self.p_list):
            raise InvalidParameter("p values must be non-negative", p_list=self.p_list)
        if any(q < 0 for q in self.qs):
            raise InvalidParameter("q values must be non-negative", qs=self.qs)
        for name, value, allowed in (
            ("format", self.format, FORMATS),
            ("filtration", self.filtration, SOURCES),
            ("sheaf", self.sheaf, SHEAVES),
            ("weight", self.weight, tuple(WEIGHTS)),
        ):
            if value not in allowed:
                raise InvalidParameter(
                    f"Unknown {name} '{value}', expected one of {', '.join(allowed)}",
                    **{name: value},
                )
        if self.format == "filtration" and self.filtration != "import":
            raise InvalidParameter("A filtration file can only be imported")
        if self.format != "filtration" and self.filtration == "import":
            raise InvalidParameter("Only filtration files can be imported")

    @property
    def r_max_or_default(self) -> float:
        if self.r_max is not None:
            return self.r_max
        # nothing born after max(t) + max(p) enters any requested Laplacian
        return max(self.t_grid[-1] + max(self.p_list), np.finfo(float).tiny)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Persistent sheaf Laplacian spectra of labeled point clouds."
    )
    parser.add_argument("--input", required=True, help="points CSV, PQR or filtration file")
    parser.add_argument("--format", choices=FORMATS)
    parser.add_argument("--filtration", choices=SOURCES)
    parser.add_argument("--rmax", type=float)
    parser.add_argument("--dmax", type=int)
    parser.add_argument("--sheaf", choices=SHEAVES)
    parser.add_argument("--weight", choices=tuple(WEIGHTS))
    parser.add_argument("--q", help="comma separated degrees, e.g. 0,1")
    parser.add_argument("--tgrid", help="'min:max:steps' or a comma list")
    parser.add_argument("--p", help="comma separated persistence values")
    parser.add_argument("--tol", type=float, help="relative zero cut for eigenvalues")
    parser.add_argument("--rank-tol", type=float)
    parser.add_argument("--scale-charges", action="store_true", default=None)
    parser.add_argument("--drop-zero-charge", action="store_true", default=None)
    parser.add_argument("--points", help="points CSV labelling an imported filtration")
    parser.add_argument("--out-csv")
    parser.add_argument("--out-svg", help="directory for the SVG plots")
    parser.add_argument("--dump-spectra", action="store_true", default=None)
    parser.add_argument("--sign-flip-report", action="store_true", default=None)
    parser.add_argument("--jobs", type=int)
    parser.add_argument("--config", help="configuration file (default: config.yml)")
    return parser


def _infer_format(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".pqr":
        return "pqr"
    return "filtration"


class PSLRunner:
    def __init__(self, config_file: Optional[str] = None):
        configParser = ConfigParser(config_file) if config_file else ConfigParser()
        self.config = configParser.app_cfg or {}
        self.log = logging.get_logger(__name__, config=configParser)

    def _setting(self, section: str, key: str, flag, default):
        """Flag value, else config.yml value, else the built-in default."""
        if flag is not None:
            return flag
        value = (self.config.get(section) or {}).get(key)
        return default if value is None else value

    def build_run_config(self, args: argparse.Namespace) -> RunConfig:
        path = Path(args.input)
        fmt = self._setting("input", "format", args.format, None) or _infer_format(path)
        source = self._setting(
            "filtration", "source", args.filtration,
            "import" if fmt == "filtration" else "rips",
        )
        tgrid = self._setting("sweep", "tgrid", args.tgrid, None)
        if tgrid is None:
            raise InvalidParameter("No t grid given, use --tgrid")
        points = self._setting("input", "points", args.points, None)
        out_csv = self._setting("output", "csv", args.out_csv, None)
        out_svg = self._setting("output", "svg", args.out_svg, None)
        r_max = self._setting("filtration", "r_max", args.rmax, None)
        return RunConfig(
            input=path,
            t_grid=parse_tgrid(tgrid),
            format=fmt,
            filtration=source,
            r_max=None if r_max is None else float(r_max),
            dim_max=int(self._setting("filtration", "dim_max", args.dmax, 2)),
            sheaf=self._setting("sheaf", "kind", args.sheaf, "labeled"),
            weight=self._setting("sheaf", "weight", args.weight, "default"),
            qs=parse_list(self._setting("sweep", "q", args.q, [0, 1]), int),
            p_list=parse_list(self._setting("sweep", "p", args.p, [0.0]), float),
            tol_zero=float(self._setting("sweep", "tol_zero", args.tol, TOL_ZERO)),
            rank_tol=float(self._setting("sweep", "rank_tol", args.rank_tol, RANK_TOL)),
            scale_charges=bool(
                self._setting("input", "scale_charges", args.scale_charges, False)
            ),
            drop_zero_charge=bool(
                self._setting("input", "drop_zero_charge", args.drop_zero_charge, False)
            ),
            points=None if points is None else Path(points),
            out_csv=None if out_csv is None else Path(out_csv),
            out_svg=None if out_svg is None else Path(out_svg),
            dump_spectra=bool(self._setting("output", "dump_spectra", args.dump_spectra, False)),
            sign_flip_report=bool(
                self._setting("output", "sign_flip_report", args.sign_flip_report, False)
            ),
            jobs=int(self._setting("sweep", "jobs", args.jobs, 1)),
        )

    def _read(self, path: Path) -> str:
        try:
            return path.read_text(encoding="utf-8")
        except OSError as error:
            raise InputError(
                f"Unable to read {path}: {error.strerror or error}", file=str(path)
            )

    def _load_cloud(self, path: Path, fmt: str, config: RunConfig) -> LabeledPointCloud:
        text = self._read(path)
        if fmt == "pqr":
            cloud = parse_pqr(text, drop_zero_charge=config.drop_zero_charge)
        else:
            cloud = parse_points_csv(text)
        self.log.info("Loaded point cloud", file=str(path), points=len(cloud))
        if config.scale_charges:
            cloud, factor = scale_charges(cloud)
            self.log.info(f"Charges scaled by {factor:.6g}", factor=factor)
        return cloud

    def _load(self, config: RunConfig):
        """Returns the filtration and the sheaf of the run."""
        cloud = None
        if config.format == "filtration":
            filtration = parse_filtration_file(self._read(config.input))
            if config.points is not None:
                cloud = self._load_cloud(config.points, "csv", config)
        else:
            cloud = self._load_cloud(config.input, config.format, config)
            filtration = build_rips(cloud, config.r_max_or_default, config.dim_max)
        self.log.info(
            "Filtration ready",
            simplices=len(filtration),
            dim=filtration.dim,
            max_birth=filtration.max_birth,
        )
        if config.sheaf == "constant":
            return filtration, SheafSpec.constant()
        if cloud is None:
            raise InvalidParameter(
                "A labeled sheaf on an imported filtration needs --points"
            )
        return filtration, SheafSpec.from_cloud(cloud, config.weight)

    def _render_plots(self, records: Sequence[PSLRecord], qs: Sequence[int]) -> Dict[str, str]:
        plots = {}
        for q in qs:
            for channel in CHANNELS:
                try:
                    plots[f"{channel}_q{q}.svg"] = emit_svg(records, channel, q)
                except NoData as error:
                    self.log.warning(error.message, **error.kwargs)
        return plots

    def _write_all(self, outputs: Dict[Path, str]) -> None:
        """Stages every file next to its target and moves them in place only
        once all of them are written."""
        staged: List[Tuple[Path, Path]] = []
        try:
            for path, text in outputs.items():
                partial = path.with_name(f".{path.name}.partial")
                try:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    partial.write_text(text, encoding="utf-8")
                except OSError as error:
                    raise OutputError(
                        f"Unable to write {path}: {error.strerror or error}", file=str(path)
                    )
                staged.append((partial, path))
            for partial, path in staged:
                try:
                    partial.replace(path)
                except OSError as error:
                    raise OutputError(
                        f"Unable to write {path}: {error.strerror or error}", file=str(path)
                    )
        except OutputError:
            for partial, _ in staged:
                partial.unlink(missing_ok=True)
            raise

    def _print_summary(self, records: Sequence[PSLRecord]) -> None:
        print(f"{'q':>3} {'t':>12} {'p':>8} {'n':>6} {'betti':>6} {'lambda_min':>14}")
        for record in records:
            lambda_min = "-" if record.lambda_min is None else f"{record.lambda_min:.6g}"
            print(
                f"{record.q:>3} {record.t:>12.6g} {record.p:>8.4g} "
                f"{record.n:>6} {record.betti:>6} {lambda_min:>14}"
            )

    def _handle_exception(self, exception: PSLException) -> int:
        """Log the error with its context and return the exit status."""
        self.log.error(exception.message, **exception.kwargs)
        return exception.exit_code

    def run(self, config: RunConfig) -> int:
        """Runs parse -> (scale) -> filtration -> sweep -> outputs.

        Nothing is written unless every step succeeded.

        Returns:
            int -- 0 on success, the error's exit code otherwise.
        """
        self.log.info("Start persistent sheaf Laplacian run", input=str(config.input))
        try:
            filtration, sheaf = self._load(config)
            records = sweep(
                filtration,
                sheaf,
                config.qs,
                config.t_grid,
                config.p_list,
                tol=config.tol_zero,
                rank_tol=config.rank_tol,
                keep_spectrum=config.dump_spectra,
                n_jobs=config.jobs,
            )
            flips = []
            if config.sign_flip_report:
                flips = sign_flip_report(
                    filtration, sheaf, config.qs, config.t_grid, config.p_list,
                    config.tol_zero, config.rank_tol, config.jobs,
                )
            outputs: Dict[Path, str] = {}
            if config.out_csv is not None:
                outputs[config.out_csv] = write_records_csv(records)
                if config.dump_spectra:
                    spectra_path = config.out_csv.with_suffix(".spectra.json")
                    outputs[spectra_path] = write_spectra_json(records)
            elif config.dump_spectra:
                self.log.warning("--dump-spectra needs --out-csv, spectra not written")
            if config.out_svg is not None:
                for name, svg in self._render_plots(records, config.qs).items():
                    outputs[config.out_svg / name] = svg
            self._write_all(outputs)
        except PSLException as error:
            return self._handle_exception(error)

        self._print_summary(records)
        for flip in flips:
            print(
                f"sign flip vertex {flip.vertex} (label {flip.label:g}): "
                f"max spectral deviation {flip.max_deviation:.3e}"
            )
        self.log.info("Run finished", records=len(records), files=len(outputs))
        return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    runner = PSLRunner(args.config)
    try:
        config = runner.build_run_config(args)
    except PSLException as error:
        return runner._handle_exception(error)
    return runner.run(config)
