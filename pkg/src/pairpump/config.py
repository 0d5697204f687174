"""Run configuration: the single defaults table, key-value file parsing, settings objects.

Every physics and numerics default lives in :data:`DEFAULTS`.  A config file is a
plain ``key = value`` text file (``#`` starts a comment); command-line flags
override file values, which override the defaults.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

#: name -> (default, parser, description).  This is the one place defaults live.
DEFAULTS = {
    # model / Green's functions
    "m": (1, int, "impurity site index; impurities sit at -m and +m"),
    "eta": (1e-6, float, "retarded broadening of the pair energy"),
    "green_epsabs": (1e-9, float, "absolute tolerance of the k-quadrature"),
    "green_epsrel": (1e-10, float, "relative tolerance of the k-quadrature"),
    "green_max_evals": (1_000_000, int, "evaluation budget of one k-quadrature"),
    "richardson": (False, "bool", "extrapolate Green elements eta -> 0 from eta and eta/2"),
    "evanescent_branch": ("drop", str, "forced-branch elements on evanescent k: keep | drop"),
    "sign_pairing": ("printed", str, "pairing of forced branches with the kernel summands: printed | alternate"),
    # pump engine
    "leg_epsrel": (1e-8, float, "relative tolerance of each leg's line integral"),
    "leg_epsabs": (1e-13, float, "absolute tolerance of each leg's line integral"),
    "finite_t_scheme": ("parts", str, "finite_T energy integral: parts (F' L, exact by parts) | fd (F dL/dE by differences)"),
    "fd_step": (1e-4, float, "energy step of the central difference in finite_T mode (scheme fd)"),
    "energy_epsabs": (1e-8, float, "absolute tolerance of the finite_T energy integral"),
    "pole_tol": (1e-4, float, "closest approach to a kernel pole that is flagged as a resonance"),
    "mode": ("zero_T", str, "pair distribution: zero_T | finite_T"),
    "beta": (1e3, float, "inverse temperature of the pair distribution"),
    "e_max": (1.0, float, "maximum pair energy of the distribution"),
    "u_min": (0.5, float, "square cycle lower corner"),
    "u_max": (4.0, float, "square cycle upper corner"),
    "vertices": ("", str, "explicit polygon 'a,b; c,d; ...' (overrides u_min/u_max)"),
    "tau": (1e4, float, "cycle period (adiabaticity report only)"),
    "workers": (1, int, "processes used for sweeps"),
    # green subcommand
    "energies": ("-5:5:20", str, "energy grid 'start:stop:num' or comma list"),
    # sweeps
    "fig2b_u_grid": ("0:5:21", str, "U grid for the footprint sweep"),
    "fig2b_e_max": (1.0, float, "maximum pair energy of the footprint sweep"),
    "fig3_e_grid": ("-5:4:37", str, "maximum-pair-energy grid of the energy sweep"),
    "fig3_m": ("1,2", str, "impurity indices of the energy sweep"),
    # oracle
    "oracle_n": (400, int, "finite-lattice size for Green-element oracles"),
    "oracle_boundary": ("absorbing", str, "finite-lattice boundary: open | periodic | absorbing"),
    "oracle_t_n": (600, int, "finite-lattice size for the T-matrix oracle"),
    "oracle_u": (2.0, float, "interaction used by the T-matrix oracle"),
    # single-particle / Slater oracle
    "sp_fermi": (0.0, float, "Fermi level of the one-body turnstile"),
    "slater_n": (400, int, "ring size of the Slater-sea evolution"),
    "slater_ratio": (1e4, float, "cycle period in units of the dwell time"),
    # acceptance
    "criteria": ("1,2,3,4,5,6,7,8,9,10", str, "acceptance criteria run by 'validate'"),
}

_CHOICES = {
    "evanescent_branch": ("keep", "drop"),
    "sign_pairing": ("printed", "alternate"),
    "mode": ("zero_T", "finite_T"),
    "finite_t_scheme": ("parts", "fd"),
    "oracle_boundary": ("open", "periodic", "absorbing"),
}


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def coerce(key, value):
    """Convert ``value`` to the type of ``DEFAULTS[key]`` and validate it."""
    if key not in DEFAULTS:
        raise ConfigError(f"unknown configuration key {key!r}")
    parser = DEFAULTS[key][1]
    try:
        out = _parse_bool(value) if parser == "bool" else parser(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None
    if key in _CHOICES and out not in _CHOICES[key]:
        raise ConfigError(f"{key} must be one of {_CHOICES[key]}, got {out!r}")
    if key.endswith(("epsabs", "epsrel", "_tol", "fd_step")) or key in ("eta", "beta", "tau"):
        if not out > 0:
            raise ConfigError(f"{key} must be positive, got {out!r}")
    return out


def load_config(path=None, overrides=None):
    """Merge defaults, an optional key-value file and explicit overrides.

    Parameters
    ----------
    path : str or Path, optional
        File of ``key = value`` lines.
    overrides : dict, optional
        Values that win over the file (``None`` entries are ignored).

    Returns
    -------
    dict
        Complete, validated configuration.
    """
    cfg = {key: spec[0] for key, spec in DEFAULTS.items()}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
        try:
            parser.read_string("[run]\n" + text)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
        for key, value in parser["run"].items():
            cfg[key] = coerce(key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = coerce(key, value)
    return cfg


def parse_grid(text):
    """Parse ``'start:stop:num'`` (inclusive linspace) or a comma-separated list."""
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            grid = np.linspace(float(start), float(stop), int(num))
        elif text:
            grid = np.array([float(t) for t in text.split(",") if t.strip()])
        else:
            grid = np.array([])
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}") from None
    if grid.size == 0:
        raise ConfigError(f"empty grid {text!r}")
    return grid


def parse_vertices(text):
    """Parse ``'a,b; c,d; ...'`` into a list of (u_minus, u_plus) tuples."""
    try:
        pts = [tuple(float(x) for x in chunk.split(",")) for chunk in text.split(";") if chunk.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse vertices {text!r}") from None
    if any(len(p) != 2 for p in pts) or len(pts) < 2:
        raise ConfigError(f"vertices need at least two 'u_minus,u_plus' pairs: {text!r}")
    return pts


@dataclass(frozen=True)
class Settings:
    """Numerical settings threaded through the Green, kernel and pump layers.

    Hashable so that cached Green elements are keyed by the full setting set.
    """

    eta: float = DEFAULTS["eta"][0]
    green_epsabs: float = DEFAULTS["green_epsabs"][0]
    green_epsrel: float = DEFAULTS["green_epsrel"][0]
    green_max_evals: int = DEFAULTS["green_max_evals"][0]
    richardson: bool = DEFAULTS["richardson"][0]
    evanescent_branch: str = DEFAULTS["evanescent_branch"][0]
    sign_pairing: str = DEFAULTS["sign_pairing"][0]
    leg_epsrel: float = DEFAULTS["leg_epsrel"][0]
    leg_epsabs: float = DEFAULTS["leg_epsabs"][0]
    finite_t_scheme: str = DEFAULTS["finite_t_scheme"][0]
    fd_step: float = DEFAULTS["fd_step"][0]
    energy_epsabs: float = DEFAULTS["energy_epsabs"][0]
    pole_tol: float = DEFAULTS["pole_tol"][0]

    def __post_init__(self):
        for name in ("eta", "green_epsabs", "green_epsrel", "leg_epsrel", "fd_step", "energy_epsabs", "pole_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name, choices in _CHOICES.items():
            if hasattr(self, name) and getattr(self, name) not in choices:
                raise ConfigError(f"{name} must be one of {choices}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def tightened(self, factor=10.0):
        """Copy with every quadrature tolerance divided by ``factor``."""
        return self.replace(
            green_epsabs=self.green_epsabs / factor,
            green_epsrel=self.green_epsrel / factor,
            leg_epsrel=self.leg_epsrel / factor,
            leg_epsabs=self.leg_epsabs / factor,
            energy_epsabs=self.energy_epsabs / factor,
        )

    @classmethod
    def from_config(cls, cfg):
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in cfg.items() if k in names})


DEFAULT_SETTINGS = Settings()
