from enum import Enum
from typing import Optional, Dict, Any


class QDErrorCode(Enum):
    SUCCESS = 0
    DOMAIN_ERROR = 1
    DEGENERATE_STATE = 2
    CONVERGENCE_ERROR = 3
    INCONSISTENT_LABELS = 4
    UNRESOLVED_DOUBLET = 5
    NUMERICAL_ERROR = 6
    CONFIG_ERROR = 7


class QDModelError(Exception):
    """Base exception for model and analysis failures"""
    code = QDErrorCode.NUMERICAL_ERROR


class DomainError(QDModelError, ValueError):
    """Raised when an input lies outside the valid domain"""
    code = QDErrorCode.DOMAIN_ERROR


class DegenerateStateError(QDModelError):
    """Raised when a splitting is too small for the eigenvectors to be defined"""
    code = QDErrorCode.DEGENERATE_STATE


class ConvergenceError(QDModelError):
    """Raised when an iterative solver or fit does not converge"""
    code = QDErrorCode.CONVERGENCE_ERROR

    def __init__(self, message: str, residual: Optional[float] = None):
        super().__init__(message)
        self.residual = residual


class InconsistencyError(QDModelError):
    """Raised when D/A labels cannot come from a two-manifold level scheme"""
    code = QDErrorCode.INCONSISTENT_LABELS

    def __init__(self, message: str, constraint: str = ""):
        super().__init__(message)
        self.constraint = constraint


class UnresolvedDoubletError(QDModelError):
    """Raised when a double-Gaussian fit cannot separate two lines"""
    code = QDErrorCode.UNRESOLVED_DOUBLET


class NumericalError(QDModelError):
    """Raised when an integration produces non-finite values"""
    code = QDErrorCode.NUMERICAL_ERROR

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(QDModelError):
    """Raised when a configuration file or key is missing or malformed"""
    code = QDErrorCode.CONFIG_ERROR

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.path = path
