# src/shared/exceptions.py
"""
Custom exceptions for wittkit
"""


class WittkitError(Exception):
    """Base exception for every wittkit failure"""
    pass


class InputError(WittkitError):
    """Raised when an input document, expression or configuration is unusable"""
    pass


class VerificationError(WittkitError):
    """Raised when an exact check that must succeed does not"""
    pass


# Ground layer

class DivisionByZero(WittkitError, ZeroDivisionError):
    """Raised when dividing by the zero scalar"""
    pass


class InvalidGammaConfig(InputError):
    """Raised when the Γ document violates its invariants"""
    pass


class InvalidScaleMap(InputError):
    """Raised when a scale map is not unimodular or not consistent with embed"""
    pass


# Lie core

class LevelOutOfRange(InputError):
    """Raised when a subquotient operand has a level outside [m, n]"""
    pass


class CentralTermPresent(InputError):
    """Raised when a central term reaches a rule that has no center"""
    pass


class EmptyComponent(InputError):
    """Raised when a view needs a nonzero homogeneous component"""
    pass


# Structure

class ZeroElement(InputError):
    """Raised when an operation needs a nonzero element"""
    pass


class ZeroGamma(InputError):
    """Raised when theta is asked for γ = 0"""
    pass


class BetaInSupport(InputError):
    """Raised when the independence witness degree lies in Supp x"""
    pass


# Derivations

class MissingImage(InputError):
    """Raised when a table derivation lacks a needed generator image"""
    pass


class NotADerivation(VerificationError):
    """Raised when the Leibniz rule or a normal form of the decomposition fails"""
    pass


class InconsistentAdditivity(VerificationError):
    """Raised when the diagonal values b_α are not additive"""
    pass


class TruncationTooShallow(InputError):
    """Raised when a truncated completion element is too short for the requested order"""
    pass


# Cohomology

class OutOfWindow(InputError):
    """Raised when a table cocycle is evaluated outside its stored window"""
    pass


class MissingUnit(InputError):
    """Raised when the cohomology needs a designated 1 ∈ Γ"""
    pass


class InconsistentC(VerificationError):
    """Raised when the central coefficient estimates disagree"""
    pass


class NotACocycle(VerificationError):
    """Raised when the cyclic cocycle identity fails"""
    pass


# Expression DSL

class ExpressionSyntaxError(InputError):
    """Raised when the expression DSL cannot be parsed"""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownGenerator(InputError):
    """Raised when an expression names a generator Γ does not have"""
    pass
