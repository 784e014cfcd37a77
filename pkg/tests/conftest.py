import numpy as np
import pytest


def _scaled_lab(color):
    from hcasal.features import lab_feature_field
    from hcasal.imaging import rgb_to_lab

    px = np.asarray(color, dtype=np.uint8).reshape(1, 1, 3)
    return lab_feature_field(rgb_to_lab(px))[0, 0]


def _saturated_color(rng, bg):
    """A saturated hue with genuinely high contrast against the background:
    scaled-Lab distance >= 0.45 (best candidate kept if none reaches it)."""
    bg_lab = _scaled_lab(bg)
    best, best_d = None, -1.0
    for _ in range(20):
        color = rng.integers(10, 50, size=3)
        color[rng.integers(0, 3)] = rng.integers(190, 250)
        d = float(np.linalg.norm(_scaled_lab(color) - bg_lab))
        if d > best_d:
            best, best_d = color, d
        if d >= 0.45:
            break
    return best


def synthetic_scene(rng, size=300, border_touching=False):
    """Uniform gray background with one saturated high-contrast rectangle or
    ellipse covering 5-30% of the area, plus Gaussian pixel noise
    (sigma = 5/255).  Border-touching variants touch exactly one image
    border with modest contact, like a 60x60 square on the top edge of a
    200x200 frame.

    Returns (rgb uint8 image, binary ground-truth mask).
    """
    h = w = size
    bg = rng.integers(100, 160, size=3)
    fg = _saturated_color(rng, bg)
    # border-touching objects need enough interior mass to survive the
    # boundary seeding, so they draw from the upper part of the area band
    area_frac = rng.uniform(0.08, 0.15) if border_touching else rng.uniform(0.05, 0.30)
    gt = np.zeros((h, w), dtype=float)

    if rng.random() < 0.5:  # rectangle
        if border_touching:
            rect_w = int(rng.integers(w // 5, int(0.35 * w)))
            rect_h = min(int(area_frac * h * w / rect_w), h - 2)
            r0 = 0
            c0 = int(rng.integers(1, w - rect_w - 1))
        else:
            rect_h = int(np.sqrt(area_frac * h * w / rng.uniform(0.7, 1.4)))
            rect_w = max(4, int(area_frac * h * w / max(rect_h, 4)))
            rect_h = max(4, min(rect_h, h - 2))
            rect_w = min(rect_w, w - 2)
            r0 = int(rng.integers(h // 8, h - rect_h - h // 8))
            c0 = int(rng.integers(w // 8, w - rect_w - w // 8))
        gt[r0 : r0 + rect_h, c0 : c0 + rect_w] = 1.0
    else:  # ellipse
        radius = np.sqrt(area_frac * h * w / np.pi)
        ry = radius * rng.uniform(0.8, 1.25)
        rx = area_frac * h * w / np.pi / ry
        if border_touching:
            cy = 0.85 * ry  # pokes past the top border with a short chord
            cx = float(rng.uniform(rx + 2, w - rx - 2))
        else:
            cy = float(rng.uniform(ry + h // 8, h - ry - h // 8))
            cx = float(rng.uniform(rx + w // 8, w - rx - w // 8))
        ys, xs = np.indices((h, w))
        gt[((ys - cy) / ry) ** 2 + ((xs - cx) / rx) ** 2 <= 1.0] = 1.0

    img = np.where(gt[..., None] > 0, fg, bg).astype(float)
    img += rng.normal(0.0, 5.0, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8), gt


def salt_and_pepper(rng, mask, fraction=0.2):
    """Flip the given fraction of pixels to random 0/1 values."""
    noisy = mask.copy()
    flat = noisy.ravel()
    idx = rng.choice(flat.size, size=int(fraction * flat.size), replace=False)
    flat[idx] = rng.integers(0, 2, size=len(idx)).astype(float)
    return noisy


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
