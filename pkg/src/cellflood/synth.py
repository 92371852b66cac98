"""Synthetic fluorescence-like test images with known ground truth.

Used by the test suite and the bundled demo: Gaussian blobs of varying
radius and color balance on a dim background, with an illumination gradient
and Poisson shot noise, so the full pipeline can be scored against the
generating truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RgbImage

__all__ = ["Blob", "BlobImage", "gaussian_blobs", "dumbbell", "demo_image"]

#: simulated photons per unit intensity for the Poisson noise model
_PHOTONS = 400.0


@dataclass(frozen=True)
class Blob:
    x: float
    y: float
    radius: float
    amplitude: float
    red_fraction: float  # 1 = pure red signal, 0 = pure green


@dataclass(frozen=True)
class BlobImage:
    image: RgbImage
    blobs: tuple[Blob, ...]

    @property
    def centers(self) -> list[tuple[float, float]]:
        return [(b.x, b.y) for b in self.blobs]


def _render_blobs(width: int, height: int, blobs: list[Blob], background: float,
                  gradient: float, rng: np.random.Generator | None) -> RgbImage:
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    red = np.zeros((height, width))
    green = np.zeros((height, width))
    for b in blobs:
        sigma = b.radius / 2.0
        g = b.amplitude * np.exp(-((xx - b.x) ** 2 + (yy - b.y) ** 2) / (2 * sigma**2))
        red += b.red_fraction * g
        green += (1.0 - b.red_fraction) * g
    red += background
    green += background
    blue = np.full((height, width), background * 0.5)

    # multiplicative left-to-right illumination ramp of the given strength
    if gradient:
        ramp = 1.0 - gradient / 2.0 + gradient * xx / max(width - 1, 1)
        red, green, blue = red * ramp, green * ramp, blue * ramp

    img = np.clip(np.stack([red, green, blue], axis=2), 0.0, 1.0)
    if rng is not None:
        img = rng.poisson(img * _PHOTONS) / _PHOTONS
        img = np.clip(img, 0.0, 1.0)
    return RgbImage(img)


def gaussian_blobs(width: int = 384, height: int = 384, n_blobs: int = 40,
                   radius_range: tuple[float, float] = (4.0, 12.0),
                   seed: int = 0, noise: bool = True, gradient: float = 0.2,
                   background: float = 0.03, touching_fraction: float = 0.15,
                   ) -> BlobImage:
    """Scatter non-overlapping Gaussian blobs, some in close touching pairs.

    Placement uses seeded rejection sampling; a ``touching_fraction`` of the
    blobs is placed as near-touching pairs so segmentation methods can be
    compared on merged-object behavior.
    """
    rng = np.random.default_rng(seed)
    margin = radius_range[1] + 2
    blobs: list[Blob] = []

    def fits(x: float, y: float, r: float) -> bool:
        for b in blobs:
            d = np.hypot(b.x - x, b.y - y)
            if d < 1.35 * (b.radius + r) + 3:
                return False
        return True

    def random_blob() -> Blob:
        return Blob(
            x=float(rng.uniform(margin, width - margin)),
            y=float(rng.uniform(margin, height - margin)),
            radius=float(rng.uniform(*radius_range)),
            amplitude=float(rng.uniform(0.45, 0.9)),
            red_fraction=float(rng.uniform(0.1, 0.9)),
        )

    n_paired = int(n_blobs * touching_fraction) & ~1  # even count, in pairs
    attempts = 0
    while len(blobs) < n_blobs - n_paired and attempts < 20000:
        attempts += 1
        cand = random_blob()
        if fits(cand.x, cand.y, cand.radius):
            blobs.append(cand)
    placed_singles = len(blobs)

    while len(blobs) < placed_singles + n_paired and attempts < 40000:
        attempts += 1
        a = random_blob()
        if not fits(a.x, a.y, a.radius):
            continue
        theta = rng.uniform(0, 2 * np.pi)
        rb = float(rng.uniform(*radius_range))
        d = 1.05 * (a.radius + rb)
        b = Blob(x=a.x + d * np.cos(theta), y=a.y + d * np.sin(theta), radius=rb,
                 amplitude=float(rng.uniform(0.45, 0.9)),
                 red_fraction=float(rng.uniform(0.1, 0.9)))
        if not (margin <= b.x <= width - margin and margin <= b.y <= height - margin):
            continue
        if fits(b.x, b.y, b.radius):
            blobs.append(a)
            blobs.append(b)

    img = _render_blobs(width, height, blobs, background, gradient,
                        rng if noise else None)
    return BlobImage(image=img, blobs=tuple(blobs))


def dumbbell(width: int = 96, height: int = 64, radius: float = 10.0,
             separation: float = 1.6, amplitude: float = 0.8) -> BlobImage:
    """Two overlapping blobs joined by a neck, centered horizontally."""
    cy = height / 2.0
    half = separation * radius / 2.0
    blobs = [
        Blob(x=width / 2.0 - half, y=cy, radius=radius, amplitude=amplitude,
             red_fraction=0.5),
        Blob(x=width / 2.0 + half, y=cy, radius=radius, amplitude=amplitude,
             red_fraction=0.5),
    ]
    img = _render_blobs(width, height, blobs, background=0.0, gradient=0.0, rng=None)
    return BlobImage(image=img, blobs=tuple(blobs))


def demo_image(seed: int = 7) -> BlobImage:
    """Deterministic sample image used by the CLI docs and smoke tests."""
    return gaussian_blobs(width=256, height=256, n_blobs=18, seed=seed)
