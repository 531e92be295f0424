from typing import Any, Dict, Optional


class DomainException(Exception):
    """Base exception for all domain exceptions"""
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class InvalidParametersException(DomainException):
    """Exception raised when problem parameters violate their invariants"""
    pass


class InvalidGeometryException(DomainException):
    """Exception raised when a closed set description is malformed"""
    pass


class UnboundedSetException(DomainException):
    """Exception raised when an operation requires a bounded set"""
    pass


class NonpositiveTimeException(DomainException):
    """Exception raised when a time argument is not strictly positive"""
    pass


class IncompleteHistoryException(DomainException):
    """Exception raised when time slices do not cover the requested interval"""
    pass


class NoClosedFormException(DomainException):
    """Exception raised when no closed-form capacity exists for a set"""
    pass


class OptimizerStalledException(DomainException):
    """Exception raised when the capacity minimizer exhausts its iterations"""
    pass


class PiecesOverlapException(DomainException):
    """Exception raised when pieces of a quasi-additivity test intersect"""
    pass


class PointwiseSolveFailedException(DomainException):
    """Exception raised when the pointwise absorption solve does not converge"""
    pass


class MaximumPrincipleViolatedException(DomainException):
    """Exception raised when a discrete solution breaks an order property"""
    pass


class NoProfileRegimeException(DomainException):
    """Exception raised when no self-similar profile exists for the exponent"""
    pass


class ShootingFailedException(DomainException):
    """Exception raised when the profile bisection cannot bracket the slope"""
    pass


class OracleDisagreementException(DomainException):
    """Exception raised when a closed form and its brute-force oracle disagree"""
    pass


class QuadratureFailedException(DomainException):
    """Exception raised when adaptive quadrature does not reach its tolerance"""
    pass


class ConfigurationException(DomainException):
    """Exception raised when an experiment configuration is inconsistent"""
    pass


class GoldenMismatchException(DomainException):
    """Exception raised when a run output differs from its golden file"""
    pass
