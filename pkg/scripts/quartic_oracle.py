"""Quantization rule for V = x^4 against finite-difference diagonalization."""
import argparse
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from wkbwigner.potentials import PotentialModel
from wkbwigner.wkb import quantize_energy


@dataclass
class QuarticConfig:
    levels: int = 9
    x_half_width: float = 6.0
    nodes: int = 4096


def fd_levels(model, cfg: QuarticConfig) -> np.ndarray:
    x = np.linspace(-cfg.x_half_width, cfg.x_half_width, cfg.nodes + 2)[1:-1]
    h = x[1] - x[0]
    kin = 1 / (2 * h * h)
    return eigh_tridiagonal(2 * kin + model(x), -kin * np.ones(cfg.nodes - 1), select="i",
                            select_range=(0, cfg.levels - 1), eigvals_only=True)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, default=9)
    cfg = QuarticConfig(levels=ap.parse_args().levels)
    model = PotentialModel.polynomial([0, 0, 0, 0, 1])
    oracle = fd_levels(model, cfg)
    for n, ref in enumerate(oracle):
        E = quantize_energy(model, n)
        print(f"n={n}: semiclassical {E:.6f}  oracle {ref:.6f}  relative error {abs(E - ref) / ref:.3%}")
