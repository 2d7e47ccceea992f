"""Shared builders: small shear frames and deterministic synthetic records."""

from __future__ import annotations

import numpy as np
import pytest

from failsafe_dampers import (
    GroundMotion,
    StructuralModel,
    build_rayleigh,
    compute_lowest_modes,
)


def shear_frame(
    n_stories: int,
    mass: float = 10.0,
    story_k: float = 13000.0,
    d_allow: float = 0.01,
    zeta: float = 0.05,
    damper_stories: tuple[int, ...] | None = None,
) -> StructuralModel:
    """Uniform shear frame with one inter-story damper per chosen story.

    Masses are lumped per floor; stiffness is the usual tridiagonal story
    pattern; drifts are story differences; inherent damping is fit to
    ``zeta`` at the two lowest modes (zero for a 1-story frame unless a
    damping ratio is requested, in which case 2 zeta omega m is used).
    """
    n = n_stories
    M = np.diag(np.full(n, mass))
    K = np.zeros((n, n))
    ks = np.full(n, story_k)
    for i in range(n):
        K[i, i] += ks[i]
        if i + 1 < n:
            K[i, i] += ks[i + 1]
            K[i, i + 1] = K[i + 1, i] = -ks[i + 1]
    H = np.zeros((n, n))
    for i in range(n):
        H[i, i] = 1.0
        if i:
            H[i, i - 1] = -1.0
    stories = tuple(range(n)) if damper_stories is None else damper_stories
    dampers = tuple(H[i : i + 1, :].copy() for i in stories)

    bare = StructuralModel(
        mass=M,
        stiffness=K,
        inherent_damping=np.zeros((n, n)),
        influence=np.ones(n),
        drift_transform=H,
        d_allow=np.full(n, d_allow),
        damper_transforms=dampers,
    )
    if zeta == 0.0:
        return bare
    if n == 1:
        w = float(np.sqrt(story_k / mass))
        C = np.array([[2.0 * zeta * w * mass]])
    else:
        modes = compute_lowest_modes(bare, 2)
        C = build_rayleigh(bare, zeta, (modes[0][0], modes[1][0]))
    return StructuralModel(
        mass=M,
        stiffness=K,
        inherent_damping=C,
        influence=np.ones(n),
        drift_transform=H,
        d_allow=np.full(n, d_allow),
        damper_transforms=dampers,
    )


def synthetic_record(
    n_steps: int,
    dt: float = 0.02,
    seed: int = 11,
    peak: float = 2.5,
    name: str | None = None,
) -> GroundMotion:
    """Band-limited, tapered noise record with a prescribed peak, m/s^2."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(n_steps + 1)
    window = np.hanning(21)
    smooth = np.convolve(raw, window / window.sum(), mode="same")
    ramp = max(2, min(50, n_steps // 10))
    taper = np.ones(n_steps + 1)
    taper[:ramp] = np.linspace(0.0, 1.0, ramp)
    taper[-ramp:] = np.linspace(1.0, 0.0, ramp)
    smooth *= taper
    smooth *= peak / np.abs(smooth).max()
    return GroundMotion(name=name or f"syn{seed}", dt=dt, accel=smooth)


def frame_with_redundant_dampers(
    n_stories=2, per_story=2, efficiencies=(1.0, 0.8), **kwargs
) -> StructuralModel:
    """Shear frame with several dampers per story.

    Distinct efficiency factors keep same-story devices from being exact
    twins, which would make every single-failure scenario equally critical.
    """
    base = shear_frame(n_stories, **kwargs)
    H = base.drift_transform
    dampers = tuple(
        efficiencies[j % len(efficiencies)] * H[s : s + 1, :]
        for s in range(n_stories)
        for j in range(per_story)
    )
    return StructuralModel(
        mass=base.mass,
        stiffness=base.stiffness,
        inherent_damping=base.inherent_damping,
        influence=base.influence,
        drift_transform=H,
        d_allow=base.d_allow,
        damper_transforms=dampers,
    )


@pytest.fixture(scope="session")
def frame_2dof() -> StructuralModel:
    """Two-story frame with dampers on both stories."""
    return shear_frame(2, mass=10.0, story_k=2000.0, d_allow=0.03)


@pytest.fixture(scope="session")
def record_short() -> GroundMotion:
    return synthetic_record(50, dt=0.02, seed=42, peak=2.0)
