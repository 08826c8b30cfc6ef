"""Oscillator level n: matched WKB wave against the Hermite oracle, with matching diagnostics."""
import argparse
import math
from dataclasses import dataclass

import numpy as np

from wkbwigner.numerics import Grid1D
from wkbwigner.potentials import PhysParams, PotentialModel, ho_exact_wave, validity_radius
from wkbwigner.wigner import marginals, wigner_transform
from wkbwigner.wkb import RegionLayout, assemble_wavefunction, match_coefficients, quantize_energy


@dataclass
class StudyConfig:
    n: int = 8
    order: int = 1
    x_half_width: float = 10.0
    nodes: int = 512
    buffer_radii: float = 3.0


def run(cfg: StudyConfig) -> dict:
    pr = PhysParams()
    model = PotentialModel.harmonic(pr)
    E = quantize_energy(model, cfg.n)
    asm = match_coefficients(model, E, cfg.order, RegionLayout())
    g = Grid1D.centered(cfg.x_half_width, cfg.nodes)
    psi = assemble_wavefunction(asm, g)
    exact = ho_exact_wave(cfg.n, pr, g)
    x0 = pr.ho_turning_point(cfg.n)
    keep = np.abs(np.abs(g.points) - x0) > cfg.buffer_radii * validity_radius(model, x0)
    c = exact.inner(psi)
    diff = psi.values - exact.values * c / abs(c)
    rho_x, _ = marginals(wigner_transform(psi, pr.hbar))
    d = asm.diagnostics
    return {
        "energy": E,
        "wave_l2": math.sqrt(np.sum(np.abs(diff[keep]) ** 2) / np.sum(np.abs(exact.values[keep]) ** 2)),
        "marginal_vs_own": float(np.max(np.abs(rho_x - np.abs(psi.values) ** 2))),
        "fit_residuals": asm.fit_residuals,
        "parity_ratio": d["parity_ratio"],
        "ratio_fitted": abs(d["ratio_CBL_DAL"]),
        "ratio_closed_form": d["ratio_CBL_DAL_closed_form"],
        "table": d["table"],
    }


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--order", type=int, default=1)
    args = ap.parse_args()
    for key, val in run(StudyConfig(n=args.n, order=args.order)).items():
        print(f"{key}: {val}")
