"""Exception types shared across the package."""


class ConfigError(Exception):
    """Run configuration is syntactically or semantically invalid."""


class MatchingError(ConfigError):
    """Boundary matching segments are inconsistent with the domain or each other."""


class SingularParameterError(ValueError):
    """A parameter value makes a requested formula singular (division by zero)."""


class IntegrationError(RuntimeError):
    """Time integration produced a non-finite state.

    Carries the failure time and the largest finite membrane-potential magnitude,
    plus whatever observation rows were recorded before the failure.
    """

    def __init__(self, t: float, max_abs_u: float, rows=None, note: str = ""):
        message = f"non-finite state at t={t:.6g} (max |u| seen: {max_abs_u:.6g})"
        if note:
            message = f"{message}; {note}"
        super().__init__(message)
        self.t = t
        self.max_abs_u = max_abs_u
        self.rows = rows if rows is not None else []
        self.note = note


class LinearSolveError(RuntimeError):
    """The implicit diffusion solve did not reach the requested tolerance."""


class EigenSolveError(RuntimeError):
    """Inverse iteration for the Neumann spectrum did not converge."""

    def __init__(self, iterations: int, residual: float, tol: float):
        super().__init__(
            f"eigenvalue iteration stalled after {iterations} iterations: "
            f"residual {residual:.3e} > tol {tol:.3e}"
        )
        self.iterations = iterations
        self.residual = residual
        self.tol = tol
