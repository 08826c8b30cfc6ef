"""Star-eigenvalue residual of the WKB Wigner function against the WKB order K,
and the hbar-scaling of the phase-equation residual."""
import argparse
from dataclasses import dataclass, field

from wkbwigner.moyal import PolySymbol, star_eigen_residual
from wkbwigner.numerics import Grid1D
from wkbwigner.potentials import PhysParams, PotentialModel
from wkbwigner.wigner import wigner_transform
from wkbwigner.wkb import assemble_wavefunction, match_coefficients, phase_residual, quantize_energy, \
    solve_phase_terms
import numpy as np


@dataclass
class OrderConfig:
    n: int = 8
    orders: tuple = (0, 1, 2)
    nodes: int = 512
    core: tuple = (-3.0, 3.0, -3.0, 3.0)
    hbars: list = field(default_factory=lambda: [0.2, 0.1])


def wigner_residuals(cfg: OrderConfig) -> dict:
    model = PotentialModel.harmonic(PhysParams())
    E = quantize_energy(model, cfg.n)
    g = Grid1D.centered(10.0, cfg.nodes)
    out = {}
    for K in cfg.orders:
        psi = assemble_wavefunction(match_coefficients(model, E, K), g)
        W = wigner_transform(psi, 1.0)
        out[K] = star_eigen_residual(PolySymbol.harmonic(), W, E, 1.0, core=cfg.core).r_eigen
    return out


def hbar_scaling(cfg: OrderConfig) -> dict:
    x = np.linspace(-1.5, 1.5, 121)
    out = {}
    for K in (1, 2, 3, 4):
        res = []
        for hb in cfg.hbars:
            m = PotentialModel.harmonic(PhysParams(hbar=hb))
            res.append(phase_residual(solve_phase_terms(m, 4.0, "I", K, (-1.5, 1.5), x), m, 4.0))
        out[K] = res[0] / res[1]
    return out


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    args = ap.parse_args()
    cfg = OrderConfig(n=args.n)
    for K, r in wigner_residuals(cfg).items():
        print(f"K={K}: r_eigen={r:.4g}")
    for K, ratio in hbar_scaling(cfg).items():
        print(f"K={K}: residual ratio on halving hbar = {ratio:.3g} (need >= {2 ** K})")
