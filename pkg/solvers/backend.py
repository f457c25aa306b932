"""
Solver backend contract
Configuration, status and result types plus dispatch to the registered backends
"""

import time
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, Mapping, Optional

from config import config
from errors import BackendUnavailable, ParameterError
from logging_config import get_logger
from solvers.model import OptModel

logger = get_logger(__name__)


@dataclass
class BackendConfig:
    """Solver id and the parameters every backend understands"""
    solver: str = "highs"
    tolerance: float = 1e-4
    time_limit: Optional[float] = None  # seconds
    threads: int = 0  # 0 = solver default
    seed: int = 0

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError(f"tolerance must be positive, got {self.tolerance}")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ParameterError(f"time limit must be positive, got {self.time_limit}")
        if self.threads < 0:
            raise ParameterError(f"thread count must be nonnegative, got {self.threads}")

    @classmethod
    def from_config(cls, cfg=config, **overrides) -> "BackendConfig":
        """Environment settings with non-None overrides applied (CLI flags)"""
        values = {
            "solver": cfg.SOLVER,
            "tolerance": cfg.TOLERANCE,
            "time_limit": cfg.TIME_LIMIT,
            "threads": cfg.THREADS,
            "seed": cfg.SEED,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)

    def to_dict(self) -> Dict:
        return asdict(self)


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    TIME_LIMIT = "time_limit"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ERROR = "error"


@dataclass
class SolveResult:
    """
    Outcome of one solve.

    On OPTIMAL the objective and a full assignment are present. On TIME_LIMIT the
    incumbent (if any) and the best bound are reported.
    """
    status: SolveStatus
    objective: Optional[float] = None
    bound: Optional[float] = None
    values: Dict[str, float] = field(default_factory=dict)
    message: str = ""
    runtime: float = 0.0
    backend: str = ""

    @property
    def ok(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def has_incumbent(self) -> bool:
        return bool(self.values)

    @property
    def gap(self) -> Optional[float]:
        if self.objective is None or self.bound is None:
            return None
        return abs(self.objective - self.bound)

    def value(self, name: str) -> float:
        return self.values[name]

    def to_dict(self) -> Dict:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "bound": self.bound,
            "message": self.message,
            "runtime": self.runtime,
            "backend": self.backend,
        }


class Backend:
    """Base class for solver backends"""

    name = "abstract"
    supports_bilinear = False
    supports_warm_start = False

    @classmethod
    def is_available(cls) -> bool:
        return False

    def solve(self, model: OptModel, cfg: BackendConfig,
              warm_start: Optional[Mapping[str, float]] = None) -> SolveResult:
        raise NotImplementedError


def _registry():
    from solvers.gurobi_backend import GurobiBackend
    from solvers.highs_backend import HighsBackend
    return {HighsBackend.name: HighsBackend, GurobiBackend.name: GurobiBackend}


def available_backends() -> Dict[str, bool]:
    """Registered backend names and whether their package imports"""
    return {name: cls.is_available() for name, cls in _registry().items()}


def get_backend(name: str) -> Backend:
    """
    Instantiate a backend by name.

    Raises:
        ParameterError: for an unknown name
        BackendUnavailable: if its package is missing
    """
    registry = _registry()
    if name not in registry:
        raise ParameterError(f"unknown solver {name!r}, expected one of {sorted(registry)}")
    backend_class = registry[name]
    if not backend_class.is_available():
        raise BackendUnavailable(f"solver {name!r} is not installed")
    return backend_class()


def supports_bilinear(name: str) -> bool:
    try:
        return get_backend(name).supports_bilinear
    except (ParameterError, BackendUnavailable):
        return False


def solve(model: OptModel, cfg: BackendConfig,
          warm_start: Optional[Mapping[str, float]] = None) -> SolveResult:
    """
    Solve a model with the configured backend.

    Never raises for solver-side problems: an unknown or missing backend, a capability
    mismatch or a failure inside the solver all come back as SolveStatus.ERROR.
    """
    try:
        backend = get_backend(cfg.solver)
    except (ParameterError, BackendUnavailable) as exc:
        logger.error(f"Cannot solve {model.name}: {exc}")
        return SolveResult(status=SolveStatus.ERROR, message=str(exc), backend=cfg.solver)

    if model.has_bilinear and not backend.supports_bilinear:
        logger.error(f"{backend.name} cannot solve bilinear model {model.name}")
        return SolveResult(status=SolveStatus.ERROR, message="bilinear unsupported", backend=backend.name)

    if warm_start and not backend.supports_warm_start:
        logger.info(f"{backend.name} ignores warm start values")
        warm_start = None

    logger.info(f"Solving {model!r} with {backend.name} (tolerance={cfg.tolerance}, "
                f"time_limit={cfg.time_limit})")
    started = time.perf_counter()
    try:
        result = backend.solve(model, cfg, warm_start)
    except Exception as exc:
        logger.exception(f"{backend.name} failed on {model.name}")
        return SolveResult(status=SolveStatus.ERROR, message=f"{type(exc).__name__}: {exc}",
                           runtime=time.perf_counter() - started, backend=backend.name)
    result.runtime = time.perf_counter() - started
    result.backend = backend.name
    logger.info(f"{model.name}: {result.status.value}, objective={result.objective}, "
                f"bound={result.bound}, {result.runtime:.2f}s")
    return result
