"""Command-line front end: energies, wave, wigner and residual jobs.

Every output starts with one ``# {json}`` header line. Floats are written with
17 significant digits and the header JSON uses sorted keys, so a fixed config
always produces the same bytes.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__
from .numerics import ComplexField1D, Grid1D, GridError, RealField2D
from .potentials import (PhysParams, PotentialModel, ho_exact_wave, ho_exact_wigner,
                         pt_exact_wave)

SCHEMA_VERSION = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class GridSpec:
    x_min: float = -8.0
    x_max: float = 8.0
    n_x: int = 129
    p_min: float = -8.0
    p_max: float = 8.0
    n_p: int = 129

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """``x_min:x_max:n_x[,p_min:p_max:n_p]``."""
        try:
            parts = [s.split(":") for s in text.split(",")]
            if len(parts) not in (1, 2) or any(len(q) != 3 for q in parts):
                raise ValueError
            x = (float(parts[0][0]), float(parts[0][1]), int(parts[0][2]))
            p = (float(parts[1][0]), float(parts[1][1]), int(parts[1][2])) if len(parts) == 2 else x
        except ValueError:
            raise ConfigError(f"bad grid spec {text!r}; expected x_min:x_max:n_x[,p_min:p_max:n_p]") from None
        return cls(*x, *p)

    @property
    def x_grid(self) -> Grid1D:
        return Grid1D(self.x_min, self.x_max, self.n_x)

    @property
    def p_grid(self) -> Grid1D:
        return Grid1D(self.p_min, self.p_max, self.n_p)


@dataclass(frozen=True)
class JobConfig:
    potential: str = "harmonic"
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    a: float = 1.0
    k: Optional[float] = None
    amplitude: float = 1.0
    coeffs: tuple = ()
    n: tuple = ()
    order: int = 1
    layout: dict = field(default_factory=dict)
    grid: GridSpec = GridSpec()
    source: str = "exact"
    component: str = "full"
    split: float = 0.0
    core: tuple = (-3.0, 3.0, -3.0, 3.0)

    def validate(self) -> "JobConfig":
        if self.potential not in ("harmonic", "poeschl_teller", "polynomial"):
            raise ConfigError(f"unknown potential {self.potential!r}")
        if self.source not in ("exact", "wkb"):
            raise ConfigError(f"unknown source {self.source!r}")
        if self.component not in ("full", "no-interference", "interference"):
            raise ConfigError(f"unknown component {self.component!r}")
        if not 0 <= self.order <= 4:
            raise ConfigError("order must lie in [0, 4]")
        if self.potential == "poeschl_teller":
            if self.k is None or self.n:
                raise ConfigError("the Poeschl-Teller potential takes k and no n")
        elif self.k is not None:
            raise ConfigError(f"k is not a parameter of the {self.potential} potential")
        if self.potential == "polynomial" and len(self.coeffs) < 3:
            raise ConfigError("polynomial potentials need coefficients up to at least x^2")
        try:
            self.grid.x_grid, self.grid.p_grid, self.params
        except (GridError, ValueError) as e:
            raise ConfigError(str(e)) from None
        return self

    @property
    def params(self) -> PhysParams:
        return PhysParams(hbar=self.hbar, mass=self.mass, omega=self.omega, a=self.a,
                          k=self.k if self.k is not None else 1.0, amplitude=self.amplitude)

    def model(self) -> PotentialModel:
        if self.potential == "harmonic":
            return PotentialModel.harmonic(self.params)
        if self.potential == "poeschl_teller":
            return PotentialModel.poeschl_teller(self.params)
        return PotentialModel.polynomial(self.coeffs, self.params)

    def levels(self) -> tuple:
        if not self.n:
            raise ConfigError("this job needs a quantum number n")
        return self.n

    def single_level(self) -> int:
        lv = self.levels()
        if len(lv) != 1:
            raise ConfigError("this job takes a single n")
        return lv[0]

    def to_json(self) -> dict:
        d = asdict(self)
        d["coeffs"] = list(self.coeffs)
        d["n"] = list(self.n)
        d["core"] = list(self.core)
        return d


def _parse_levels(value) -> tuple:
    if isinstance(value, int):
        return (value,)
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    text = str(value)
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad level list {text!r}") from None


def build_config(raw: dict) -> JobConfig:
    known = {f.name for f in fields(JobConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kw = dict(raw)
    try:
        if "grid" in kw and not isinstance(kw["grid"], GridSpec):
            g = kw["grid"]
            kw["grid"] = GridSpec.parse(g) if isinstance(g, str) else GridSpec(**g)
        if "n" in kw:
            kw["n"] = _parse_levels(kw["n"])
        for key in ("coeffs", "core"):
            if key in kw:
                kw[key] = tuple(float(v) for v in kw[key])
        for key in ("hbar", "mass", "omega", "a", "amplitude", "split"):
            if key in kw:
                kw[key] = float(kw[key])
        if kw.get("k") is not None:
            kw["k"] = float(kw["k"])
        if "order" in kw:
            kw["order"] = int(kw["order"])
        cfg = JobConfig(**kw)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None
    return cfg.validate()


# ---------------------------------------------------------------------------
# file format

def _fmt(v: float) -> str:
    return "%.17g" % v


def make_header(command: str, cfg: JobConfig, extra: dict) -> dict:
    head = {
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": cfg.to_json(),
        "provenance": f"wkbwigner {__version__} {command}",
    }
    head.update(extra)
    return head


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (complex, np.complexfloating)):
        return [float(o.real), float(o.imag)]
    if isinstance(o, Grid1D):
        return grid_to_json(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def header_line(head: dict) -> str:
    return "# " + json.dumps(head, sort_keys=True, default=_json_default, allow_nan=False) + "\n"


def grid_to_json(g: Grid1D) -> dict:
    return {"x_min": g.x_min, "x_max": g.x_max, "n": g.n}


def grid_from_json(d: dict) -> Grid1D:
    return Grid1D(float(d["x_min"]), float(d["x_max"]), int(d["n"]))


def read_header(text_or_file) -> dict:
    """Header dict of an output file (path or open text stream)."""
    if isinstance(text_or_file, str):
        with open(text_or_file, encoding="utf-8") as f:
            first = f.readline()
    else:
        first = text_or_file.readline()
    if not first.startswith("# "):
        raise ValueError("missing '# {json}' header line")
    return json.loads(first[2:])


def read_field_csv(path: str) -> tuple:
    """(header, RealField2D) of a wigner output."""
    head = read_header(path)
    data = np.loadtxt(path, delimiter=",", comments="#", skiprows=2)
    xg, pg = grid_from_json(head["x_grid"]), grid_from_json(head["p_grid"])
    return head, RealField2D(xg, pg, data[:, 2].reshape(xg.n, pg.n))


def field_rows(W: RealField2D) -> str:
    x, p = W.x_grid.points, W.p_grid.points
    buf = io.StringIO()
    for i in range(x.size):
        xi = _fmt(x[i])
        for j in range(p.size):
            buf.write(f"{xi},{_fmt(p[j])},{_fmt(W.values[i, j])}\n")
    return buf.getvalue()


def wave_rows(psi: ComplexField1D) -> str:
    return "".join(f"{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)}\n" for x, v in zip(psi.x, psi.values))


# ---------------------------------------------------------------------------
# jobs

def _state_grid(cfg: JobConfig, model: PotentialModel) -> tuple:
    """A grid with the x-grid's spacing that contains both the x grid and the model window."""
    xg = cfg.grid.x_grid
    lo, hi = model.default_window()
    dx = xg.spacing
    left = max(0, int(math.ceil((xg.x_min - lo) / dx - 1e-9)))
    right = max(0, int(math.ceil((hi - xg.x_max) / dx - 1e-9)))
    g = Grid1D.from_spacing(xg.x_min - left * dx, dx, xg.n + left + right)
    return g, Grid1D.from_spacing(g.points[left], dx, xg.n)


def _wkb_wave(cfg: JobConfig, grid: Grid1D) -> tuple:
    from .wkb import RegionLayout, assemble_wavefunction, match_coefficients, quantize_energy, \
        single_region_assembly

    model = cfg.model()
    if cfg.potential == "poeschl_teller":
        asm = single_region_assembly(model, cfg.params.pt_energy, cfg.order, window=(grid.x_min, grid.x_max))
        return assemble_wavefunction(asm, grid, normalize=False), {}
    n = cfg.single_level()
    E = quantize_energy(model, n)
    lo, hi = model.default_window()
    window = (min(lo, grid.x_min), max(hi, grid.x_max))
    asm = match_coefficients(model, E, cfg.order, RegionLayout(**cfg.layout), window=window)
    info = {"energy": E, "fit_residuals": asm.fit_residuals,
            "parity_ratio": asm.diagnostics["parity_ratio"]}
    return assemble_wavefunction(asm, grid), info


def cmd_energies(cfg: JobConfig) -> str:
    from .wkb import quantize_energy

    if cfg.potential == "poeschl_teller":
        raise ConfigError("the Poeschl-Teller potential has no bound levels")
    model = cfg.model()
    rows = "".join(f"{n},{_fmt(quantize_energy(model, n))}\n" for n in cfg.levels())
    return header_line(make_header("energies", cfg, {})) + "n,E\n" + rows


def cmd_wave(cfg: JobConfig) -> str:
    grid = cfg.grid.x_grid
    extra: dict = {"x_grid": grid}
    if cfg.source == "exact":
        if cfg.potential == "harmonic":
            psi = ho_exact_wave(cfg.single_level(), cfg.params, grid)
        elif cfg.potential == "poeschl_teller":
            psi = pt_exact_wave(cfg.params, grid)
        else:
            raise ConfigError("no exact wave for polynomial potentials")
    else:
        psi, info = _wkb_wave(cfg, grid)
        extra.update(info)
        if cfg.potential == "poeschl_teller":
            ex = pt_exact_wave(cfg.params, grid).values
            extra["scale_to_exact"] = complex(np.vdot(psi.values, ex) / np.vdot(psi.values, psi.values))
    return header_line(make_header("wave", cfg, extra)) + "x,re,im\n" + wave_rows(psi)


def _wigner_field(cfg: JobConfig) -> tuple:
    from .wigner import WindowedState, interference_wigner, partial_wigner, wigner_transform

    xg, pg = cfg.grid.x_grid, cfg.grid.p_grid
    extra: dict = {}
    if cfg.source == "exact" and cfg.potential == "harmonic":
        W = ho_exact_wigner(cfg.single_level(), cfg.params, xg, pg)
        if cfg.component != "full":
            raise ConfigError("exact fields are only available with component=full")
    elif cfg.source == "exact" and cfg.potential == "poeschl_teller":
        from .distributions import pt_exact_wigner

        if cfg.component != "full":
            raise ConfigError("exact fields are only available with component=full")
        t = pt_exact_wigner(cfg.params, xg, pg)
        W = RealField2D(xg, pg, t.smooth.values + t.pv.values + t.residual.values)
        extra["delta_atoms"] = [{"p": t.delta_location, "weight": t.delta_coefficient}]
        extra["delta_coefficient"] = t.delta_coefficient
    elif cfg.source == "wkb" and cfg.potential != "poeschl_teller":
        state_grid, out_grid = _state_grid(cfg, cfg.model())
        psi, info = _wkb_wave(cfg, state_grid)
        extra.update(info)
        hb = cfg.hbar
        if cfg.component == "full":
            W = wigner_transform(psi, hb, pg, out_grid)
        else:
            left = WindowedState.cut(psi, -math.inf, cfg.split)
            right = WindowedState.cut(psi, cfg.split, math.inf)
            W = interference_wigner(left, right, hb, pg, out_grid)
            if cfg.component == "no-interference":
                W = RealField2D(out_grid, pg, partial_wigner(left, hb, pg, out_grid).values
                                + partial_wigner(right, hb, pg, out_grid).values, {})
        extra["tail_mass"] = W.meta.get("tail_mass", 0.0)
        W = RealField2D(xg, pg, W.values, W.meta)
    else:
        raise ConfigError(f"no Wigner route for source={cfg.source} with potential={cfg.potential}")
    extra.update({"x_grid": xg, "p_grid": pg, "grid_sum": W.total()})
    return W, extra


def cmd_wigner(cfg: JobConfig) -> str:
    W, extra = _wigner_field(cfg)
    return header_line(make_header("wigner", cfg, extra)) + "x,p,W\n" + field_rows(W)


def cmd_residual(cfg: JobConfig) -> str:
    from .moyal import PolySymbol, star_eigen_residual

    if cfg.potential == "poeschl_teller":
        raise ConfigError("residuals need a polynomial Hamiltonian")
    if cfg.potential == "harmonic":
        H = PolySymbol.harmonic(cfg.mass, cfg.omega)
        E = cfg.params.ho_energy(cfg.single_level())
        freq = cfg.omega
    else:
        H = PolySymbol.hamiltonian(cfg.coeffs, cfg.mass)
        from .wkb import quantize_energy
        E = quantize_energy(cfg.model(), cfg.single_level())
        freq = 1.0
    if cfg.source == "wkb":
        from .wkb import quantize_energy
        E = quantize_energy(cfg.model(), cfg.single_level())
    W, extra = _wigner_field(cfg)
    rep = star_eigen_residual(H, W, E, cfg.hbar, cfg.core, freq)
    out = make_header("residual", cfg, {"x_grid": cfg.grid.x_grid, "p_grid": cfg.grid.p_grid})
    out.update({"r_eigen": rep.r_eigen, "r_bracket": rep.r_bracket, "energy": E})
    return json.dumps(out, sort_keys=True, default=_json_default, allow_nan=False, indent=1) + "\n"


COMMANDS = {"energies": cmd_energies, "wave": cmd_wave, "wigner": cmd_wigner, "residual": cmd_residual}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wkbwigner", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON job file; flags below override it")
    ap.add_argument("--potential")
    ap.add_argument("--n", help="level, comma list or lo:hi range")
    ap.add_argument("--k", type=float)
    ap.add_argument("--order", type=int)
    ap.add_argument("--grid", help="x_min:x_max:n_x[,p_min:p_max:n_p]")
    ap.add_argument("--source", choices=["wkb", "exact"])
    ap.add_argument("--component", choices=["full", "no-interference", "interference"])
    ap.add_argument("--out", help="output path (default: stdout)")
    return ap


def _fail(code: int, token: str, msg: str) -> int:
    sys.stderr.write(f"error={token} {' '.join(str(msg).split())}\n")
    return code


def main(argv=None) -> int:
    from .potentials import OutOfWindowError
    from .wkb import CoverageError, MatchingError, QuantizationError, ValidityError

    args = _parser().parse_args(argv)
    try:
        raw: dict = {}
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as f:
                    raw = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                raise ConfigError(f"cannot read config: {e}") from None
            if not isinstance(raw, dict):
                raise ConfigError("config must be a JSON object")
        for key in ("potential", "n", "k", "order", "grid", "source", "component"):
            v = getattr(args, key)
            if v is not None:
                raw[key] = v
        cfg = build_config(raw)
        text = COMMANDS[args.command](cfg)
    except (ConfigError, GridError, CoverageError, ValidityError, OutOfWindowError) as e:
        return _fail(EXIT_CONFIG, "config", e)
    except (QuantizationError, MatchingError) as e:
        return _fail(EXIT_NUMERIC, "numerical", e)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
