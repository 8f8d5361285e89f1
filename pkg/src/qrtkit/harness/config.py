"""Suite configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ConfigError, IoError
from ..theories import ResourceTheory, theory_from_json

SUITES = ("reduction", "faithfulness", "minimax", "monotonicity", "continuity", "inequality",
          "collapse", "smoothing", "subadditivity", "stein", "chernoff", "ogawa_nagaoka", "axioms")


@dataclass
class SuiteConfig:
    theories: list = field(default_factory=lambda: [{"theory": "coherence"}])
    suites: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: list(range(10)))
    restarts: int = 4
    rhs_restarts: int = 8
    max_iter: int = 200
    tol: float = 2e-4
    zero_tol: float = 1e-5
    superchannels: int = 10
    measures: list = field(default_factory=lambda: ["DF", "EF", "LRF", "uLRF", "RF", "tRF", "DAF", "EAF"])
    eps_grid: list = field(default_factory=lambda: [0.05, 0.1, 0.5])
    continuity_eps: list = field(default_factory=lambda: [0.01, 0.05, 0.2])
    stein_eps: float = 0.05
    stein_nmax: int = 3
    axiom_samples: int = 20
    out_dir: str = "qrtkit_out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("tol", "zero_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not isinstance(self.seeds, list) or not all(isinstance(s, int) for s in self.seeds):
            raise ConfigError("seeds must be an explicit list of integers")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}; choose from {list(SUITES)}")
        if self.restarts < 1 or self.rhs_restarts < 1:
            raise ConfigError("restarts must be at least 1")
        if not isinstance(self.theories, list) or not self.theories:
            raise ConfigError("theories must be a non-empty list of theory specs")

    def build_theories(self) -> list[tuple[str, ResourceTheory]]:
        out = []
        for spec in self.theories:
            T = theory_from_json(spec)
            out.append((spec.get("name", T.name), T))
        return out

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj) -> "SuiteConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        extra = sorted(set(obj) - known)
        if extra:
            raise ConfigError(f"unknown config keys {extra}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path) -> "SuiteConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(obj)
