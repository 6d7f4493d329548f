"""
config.py - Run configuration

This module handles:
- RunConfig, the validated record driving one simulation
- Flat ``key = value`` run files (python-dotenv) merged with CLI overrides
- Mesh and on/off switch parsing shared by the CLIs and campaign files
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import dotenv_values
from pydantic import BaseModel, ValidationError, field_validator, model_validator

from scripts.core.errors import ConfigError
from scripts.core.problems import CATALOG, ProblemSpec, get_problem
from scripts.utils.io_helpers import read_utf8
from scripts.utils.paths import default_run_dir

# config-file / campaign keys -> RunConfig fields
KEY_MAP = {
    "problem": "problem",
    "mesh": "mesh",
    "cfl": "cfl",
    "tfinal": "t_final",
    "t_final": "t_final",
    "ct": "ct",
    "pp": "pp",
    "nu": "nu",
    "gamma": "gamma",
    "out": "out",
    "snapshots": "snapshots",
    "threads": "threads",
    "eps_rho": "eps_rho",
    "eps_p": "eps_p",
    "schlieren_k": "schlieren_k",
    "debug": "debug",
}


def parse_mesh(value: Any) -> Tuple[int, ...]:
    """'32x64', '32,64' or a sequence -> (32, 64)."""
    if isinstance(value, (tuple, list)):
        return tuple(int(v) for v in value)
    text = str(value).strip().lower().replace("x", ",")
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse mesh '{value}'") from None


def parse_switch(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("on", "true", "yes", "1"):
        return True
    if text in ("off", "false", "no", "0"):
        return False
    raise ConfigError(f"expected on/off, got '{value}'")


class RunConfig(BaseModel):
    """Validated settings of one run.

    Fields left as None are filled from the problem catalog: mesh,
    t_final, gamma and pp (on when the problem requires the limiter).
    """

    problem: str
    mesh: Optional[Tuple[int, ...]] = None
    cfl: float = 0.5
    t_final: Optional[float] = None
    ct: bool = True
    pp: Optional[bool] = None
    nu: float = 0.01
    gamma: Optional[float] = None
    snapshots: int = 0
    out: Optional[Path] = None
    threads: int = 1
    eps_rho: float = 1e-12
    eps_p: float = 1e-12
    schlieren_k: float = 20.0
    debug: bool = False

    @field_validator("problem")
    @classmethod
    def _known_problem(cls, v: str) -> str:
        if v not in CATALOG:
            raise ValueError(f"unknown problem '{v}'; choose from {', '.join(CATALOG)}")
        return v

    @field_validator("mesh", mode="before")
    @classmethod
    def _mesh(cls, v: Any) -> Any:
        return None if v is None else parse_mesh(v)

    @field_validator("ct", "debug", mode="before")
    @classmethod
    def _switch(cls, v: Any) -> bool:
        return parse_switch(v)

    @field_validator("pp", mode="before")
    @classmethod
    def _optional_switch(cls, v: Any) -> Optional[bool]:
        return None if v is None else parse_switch(v)

    @field_validator("cfl")
    @classmethod
    def _cfl(cls, v: float) -> float:
        if not 0.0 < v <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {v}")
        return v

    @field_validator("nu")
    @classmethod
    def _nu(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"nu must be >= 0, got {v}")
        return v

    @field_validator("eps_rho", "eps_p", "schlieren_k")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    @field_validator("snapshots")
    @classmethod
    def _snapshots(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"snapshots must be >= 0, got {v}")
        return v

    @field_validator("threads")
    @classmethod
    def _threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError(f"threads must be >= 1, got {v}")
        return v

    @model_validator(mode="after")
    def _fill_from_problem(self) -> "RunConfig":
        spec = get_problem(self.problem)
        if self.mesh is None:
            self.mesh = spec.default_mesh
        if len(self.mesh) != spec.dim or spec.dim not in (2, 3):
            raise ValueError(f"{self.problem} needs a rank-{spec.dim} mesh, got {self.mesh}")
        if any(n < 1 for n in self.mesh):
            raise ValueError(f"mesh extents must be positive, got {self.mesh}")
        if self.t_final is None:
            self.t_final = spec.t_final
        if self.t_final < 0:
            raise ValueError(f"t_final must be >= 0, got {self.t_final}")
        if self.gamma is None:
            self.gamma = spec.gamma
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if self.pp is None:
            self.pp = spec.pp_required
        if self.out is None:
            self.out = default_run_dir(self.problem, self.mesh)
        return self

    @property
    def energy_correction(self) -> bool:
        """The energy correction is applied iff the limiter is on."""
        return bool(self.pp)

    @property
    def problem_spec(self) -> ProblemSpec:
        return get_problem(self.problem)


def load_config_file(path: Path) -> Dict[str, str]:
    """Read a flat ``key = value`` file into RunConfig field names.

    Raises:
        ConfigError: missing file or unknown keys
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    raw = dotenv_values(stream=io.StringIO(read_utf8(path)))
    return normalize_keys(raw, source=str(path))


def normalize_keys(values: Mapping[str, Any], source: str = "config") -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in values.items():
        norm = key.strip().lower().replace("-", "_")
        if norm not in KEY_MAP:
            raise ConfigError(f"unknown key '{key}' in {source}")
        if value is None or (isinstance(value, str) and value.strip() == ""):
            continue
        out[KEY_MAP[norm]] = value
    return out


def build_config(file_values: Optional[Mapping[str, Any]] = None,
                 overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """Merge file values with CLI overrides (overrides win) and validate.

    Raises:
        ConfigError: the merged settings do not validate
    """
    merged: Dict[str, Any] = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "problem" not in merged:
        raise ConfigError("no problem given (use --problem or problem = ... in the config file)")
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration: {e}") from e
