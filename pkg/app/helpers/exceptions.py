#!/usr/bin/env python3
# -*- coding: utf-8 -*-


class PSLException(Exception):
    """Base exception for every error raised while computing persistent sheaf
    Laplacian spectra.

    The keyword arguments are kept as context so they can be passed on to the
    structured logger when the error is reported.
    """

    exit_code = 1

    def __init__(self, message, **kwargs):
        super().__init__(message)
        self.message = message
        self.kwargs = kwargs

    def __str__(self):
        return self.message


class InvalidParameter(PSLException):
    """Exception raised when a numeric parameter is out of its valid range."""

    exit_code = 6
