"""Plain-text ``key=value`` experiment configuration."""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .solver import SolverConfig


@dataclass
class ExperimentConfig:
    mode: str = "affine"  # synthetic | affine | log
    d: int = 20
    p: int = 2
    Lc: float = 0.25
    mesh_n: int = 2
    subdivisions: int = 16
    trials: int = 24
    seed0: int = 0
    schedule_k_max: int = 7
    m_ref: int = 0  # 0 selects max(3N, 2000)
    # synthetic mode only
    sparsity: int = 4
    noise: float = 0.0
    # solver
    tau: float = 1.0
    x_tol: float = 1.0
    g_tol: float = 0.1
    xi: float = 1e-5
    max_inner: int = 10000
    max_fpc_stages: int = 60
    max_bregman: int = 50

    def __post_init__(self):
        if self.mode not in ("synthetic", "affine", "log"):
            raise ValueError(f"mode must be synthetic, affine or log; got {self.mode!r}")
        if self.trials < 1 or self.schedule_k_max < 1:
            raise ValueError("trials and schedule_k_max must be positive")
        self.solver_config()

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            tau=self.tau, x_tol=self.x_tol, g_tol=self.g_tol, xi=self.xi,
            max_inner=self.max_inner, max_fpc_stages=self.max_fpc_stages,
            max_bregman=self.max_bregman,
        )

    def reference_size(self, N: int) -> int:
        return self.m_ref if self.m_ref > 0 else max(3 * N, 2000)

    def canonical_text(self) -> str:
        return "".join(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n"
                       for k, v in asdict(self).items())

    def fingerprint(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def m_schedule(N: int, k_max: int) -> list[int]:
    """Sample counts ``ceil(k N / 8)`` for ``k = 1..k_max``."""
    return [math.ceil(k * N / 8) for k in range(1, k_max + 1)]


_ALIASES = {"coeff": "mode", "L_c": "Lc"}


def parse_config(text: str) -> ExperimentConfig:
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in types:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        kind = types[key]
        try:
            values[key] = value if kind == "str" else int(value) if kind == "int" else float(value)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
