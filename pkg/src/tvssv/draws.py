"""Container for retained MCMC output."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class PosteriorDraws:
    """Named arrays whose first axis indexes retained iterations, plus metadata."""

    arrays: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __getitem__(self, key: str) -> np.ndarray:
        return self.arrays[key]

    def __contains__(self, key: str) -> bool:
        return key in self.arrays

    @property
    def n_draws(self) -> int:
        return next(iter(self.arrays.values())).shape[0] if self.arrays else 0

    def subset(self, idx) -> PosteriorDraws:
        return PosteriorDraws({k: v[idx] for k, v in self.arrays.items()}, dict(self.meta))

    def summary(self, probs=(0.05, 0.5, 0.95)) -> list[dict]:
        """Posterior mean, sd and quantiles of every scalar parameter."""
        rows = []
        for name, arr in self.arrays.items():
            if name in PATH_KEYS:
                continue
            flat = arr.reshape(arr.shape[0], -1)
            for j in range(flat.shape[1]):
                label = name if flat.shape[1] == 1 else f"{name}[{_index_label(arr.shape[1:], j)}]"
                col = flat[:, j]
                row = {"parameter": label, "mean": float(col.mean()), "sd": float(col.std(ddof=1)) if col.size > 1 else 0.0}
                for p, q in zip(probs, np.quantile(col, probs)):
                    row[f"q{p:g}"] = float(q)
                rows.append(row)
        return rows


PATH_KEYS = {"log_h", "lam", "v", "o"}


def _index_label(shape, j):
    return ",".join(str(i) for i in np.unravel_index(j, shape))
