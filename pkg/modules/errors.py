# modules/errors.py
"""
Error hierarchy shared by every module.

Each error carries an ``exit_code`` so the command-line front end can map a
failure to a distinct process status without inspecting messages.
"""


class RankinError(Exception):
    exit_code = 2


class ConfigError(RankinError):
    exit_code = 3


# arith
class PoleAtOne(RankinError):
    exit_code = 10


class ParityMismatch(RankinError):
    exit_code = 11


# forms
class NotHolomorphic(RankinError):
    exit_code = 20


class NotFound(RankinError):
    exit_code = 21


class NetworkUnavailable(RankinError):
    exit_code = 22


class SchemaMismatch(RankinError):
    exit_code = 23


class InsufficientCoefficients(RankinError):
    exit_code = 24


# eisenstein
class TrivialCharacter(RankinError):
    exit_code = 30


class NotAbsolutelyConvergent(RankinError):
    exit_code = 31


class UnsupportedContinuationPoint(RankinError):
    exit_code = 32


class PoleEncountered(RankinError):
    exit_code = 33


class NotDegreeZero(RankinError):
    exit_code = 34


# rankin
class BadPrime(RankinError):
    exit_code = 40


class OutsideConvergence(RankinError):
    exit_code = 41


class PoleWarning(UserWarning):
    pass


# lfunc
class NotEnoughCoefficients(RankinError):
    exit_code = 50


class FunctionalEquationInvalid(RankinError):
    exit_code = 51


class CrossCheckFailed(RankinError):
    exit_code = 52


# quadrature
class InvarianceCheckFailed(RankinError):
    exit_code = 60


class TruncationDominates(RankinError):
    exit_code = 61


# regulator
class AutomorphicFactorVanishes(RankinError):
    exit_code = 70
