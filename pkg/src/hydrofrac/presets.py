"""Named initial data.

A preset is written as a call, e.g. ``random_band(k_max=4, z_modes=2, amplitude=0.5, seed=3)``;
positional arguments follow the order of the builder's signature.  Every preset
has its trapezoidal vertical mean removed so the result lies in the space of
horizontal velocities with zero depth average.
"""

import ast
import inspect

import numpy as np

from .spectral import dz_fd, vertical_mean

PROFILES = {
    "linear": lambda z: z - 0.5,
    "cos": lambda z: np.cos(np.pi * z),
    "cos2": lambda z: np.cos(2 * np.pi * z),
    "quadratic": lambda z: z**2 - 1.0 / 3.0,
}


def _profile(name):
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


def zero(grid):
    return grid.zeros()


def single_mode(grid, k=1, profile="linear", amplitude=1.0):
    """``amplitude * cos(2 pi k x) * p(z)``."""
    X, Z = grid.mesh
    if not 0 <= k <= grid.n_x // 3:
        raise ValueError(f"single_mode wavenumber {k} is outside the dealiased band")
    return amplitude * np.cos(2 * np.pi * k * X) * _profile(profile)(Z)


def shear(grid, amplitude=0.1, profile="tanh", width=0.1, perturbation=0.1, k=1):
    """A vertical shear layer with a ``cos(2 pi k x)`` modulation, scaled so ``max|omega_0| = amplitude``."""
    X, Z = grid.mesh
    if profile == "tanh":
        base = np.tanh((Z - 0.5) / width)
    else:
        base = _profile(profile)(Z)
    u = base * (1.0 + perturbation * np.cos(2 * np.pi * k * X))
    u = u - vertical_mean(grid, u)
    peak = np.abs(dz_fd(grid, u)).max()
    return u * (amplitude / peak) if peak > 0 else u


def random_band(grid, k_max=4, z_modes=2, amplitude=0.1, seed=0):
    """Random Fourier-cosine field on ``1 <= k <= k_max``, ``1 <= m <= z_modes``; ``max|u_0| = amplitude``.

    Coefficients are standard normal, damped by ``1 / (k m)``.
    """
    if not 1 <= k_max <= grid.n_x // 3:
        raise ValueError(f"k_max = {k_max} must lie in [1, n_x/3]")
    if z_modes < 1:
        raise ValueError("z_modes must be >= 1")
    rng = np.random.default_rng(seed)
    X, Z = grid.mesh
    u = np.zeros(grid.physical_shape)
    for k in range(1, k_max + 1):
        for m in range(1, z_modes + 1):
            a, b = rng.standard_normal(2) / (k * m)
            u += (a * np.cos(2 * np.pi * k * X) + b * np.sin(2 * np.pi * k * X)) * np.cos(m * np.pi * Z)
    peak = np.abs(u).max()
    return u * (amplitude / peak)


BUILDERS = {
    "zero": zero,
    "single_mode": single_mode,
    "shear": shear,
    "random_band": random_band,
}


def parse_preset(text):
    """Split ``name(args...)`` into ``(name, kwargs)``; only literal arguments are accepted."""
    try:
        node = ast.parse(text.strip(), mode="eval").body
    except SyntaxError as exc:
        raise ValueError(f"cannot parse initial_data {text!r}") from exc
    if isinstance(node, ast.Name):
        name, args, keywords = node.id, [], []
    elif isinstance(node, ast.Call) and isinstance(node.func, ast.Name):
        name, args, keywords = node.func.id, node.args, node.keywords
    else:
        raise ValueError(f"initial_data must look like name(arg=value, ...), got {text!r}")
    if name not in BUILDERS:
        raise ValueError(f"unknown initial_data preset {name!r}; choose from {sorted(BUILDERS)}")
    params = list(inspect.signature(BUILDERS[name]).parameters)[1:]
    if len(args) > len(params):
        raise ValueError(f"too many arguments for {name}")
    try:
        kwargs = {p: ast.literal_eval(a) for p, a in zip(params, args)}
        for kw in keywords:
            if kw.arg not in params:
                raise ValueError(f"{name} has no parameter {kw.arg!r}")
            kwargs[kw.arg] = ast.literal_eval(kw.value)
    except (ValueError, SyntaxError) as exc:
        raise ValueError(f"bad argument in initial_data {text!r}: {exc}") from None
    return name, kwargs


def build_initial(grid, text, seed=0):
    """Evaluate a preset descriptor on ``grid``; ``random_band`` falls back to ``seed`` if none is given."""
    name, kwargs = parse_preset(text)
    if name == "random_band":
        kwargs.setdefault("seed", seed)
    u = BUILDERS[name](grid, **kwargs)
    return u - vertical_mean(grid, u)
