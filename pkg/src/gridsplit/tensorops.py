"""Dense feature-map operations.

Maps are (H, W, C) float arrays.  Everything here is implemented with
numpy broadcasting; inputs are upcast to float64 so the loss gradients
checked elsewhere see consistent precision.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError


def _as_map(t, name="input") -> np.ndarray:
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeError(f"{name} must be (H, W, C), got shape {arr.shape}")
    return arr


def bilinear_upsample(t, factor: int) -> np.ndarray:
    """Upsample (H, W, C) by an integer factor, align_corners=False.

    Output pixel (i, j) samples the input at ((i+0.5)/factor - 0.5,
    (j+0.5)/factor - 0.5) with edge clamping, so constant maps stay
    constant and factor 1 is an exact copy.
    """
    arr = _as_map(t)
    if factor < 1 or int(factor) != factor:
        raise ShapeError(f"upsample factor must be a positive integer, got {factor}")
    factor = int(factor)
    if factor == 1:
        return arr.copy()
    h, w, _ = arr.shape

    def axis_coords(n):
        src = (np.arange(n * factor, dtype=np.float64) + 0.5) / factor - 0.5
        src = np.clip(src, 0.0, n - 1.0)
        lo = np.floor(src).astype(np.intp)
        hi = np.minimum(lo + 1, n - 1)
        return lo, hi, src - lo

    y0, y1, wy = axis_coords(h)
    x0, x1, wx = axis_coords(w)
    wy = wy[:, None, None]
    wx = wx[None, :, None]
    top = arr[y0][:, x0] * (1 - wx) + arr[y0][:, x1] * wx
    bot = arr[y1][:, x0] * (1 - wx) + arr[y1][:, x1] * wx
    return top * (1 - wy) + bot * wy


def fuse_fpn(p2, p3, p4, p5) -> np.ndarray:
    """Sum a 4-level pyramid into the finest level's resolution.

    p_k must be p2's spatial size divided by 2^(k-2) with a shared
    channel count; p3/p4/p5 are bilinearly upsampled by 2/4/8.
    """
    maps = [_as_map(p, f"p{i}") for i, p in zip(range(2, 6), (p2, p3, p4, p5))]
    h, w, c = maps[0].shape
    for k, m in enumerate(maps[1:], start=1):
        want = (-(-h // (1 << k)), -(-w // (1 << k)), c)
        if m.shape != want:
            raise ShapeError(f"p{k + 2} shape {m.shape} incompatible with p2 {maps[0].shape}")
    out = maps[0].copy()
    for k, m in enumerate(maps[1:], start=1):
        up = bilinear_upsample(m, 1 << k)
        out += up[:h, :w]
    return out


def conv2d(t, weights, bias=None) -> np.ndarray:
    """Same-padded 2-D convolution (cross-correlation), odd kernels only.

    weights: (kh, kw, Cin, Cout); bias: (Cout,) or None.
    """
    arr = _as_map(t)
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 4:
        raise ShapeError(f"weights must be (kh, kw, Cin, Cout), got {w.shape}")
    kh, kw, cin, cout = w.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ShapeError(f"kernel dims must be odd, got {kh}x{kw}")
    if cin != arr.shape[2]:
        raise ShapeError(f"input has {arr.shape[2]} channels, weights expect {cin}")
    padded = np.pad(arr, ((kh // 2, kh // 2), (kw // 2, kw // 2), (0, 0)))
    win = sliding_window_view(padded, (kh, kw), axis=(0, 1))
    out = np.einsum("hwcij,ijcd->hwd", win, w, optimize=True)
    if bias is not None:
        b = np.asarray(bias, dtype=np.float64)
        if b.shape != (cout,):
            raise ShapeError(f"bias shape {b.shape} != ({cout},)")
        out += b
    return out


def maxpool_2x1(t) -> np.ndarray:
    """Max-pool pairs of rows (kernel 2x1, stride 2).

    Odd heights replicate the last row, so output height is ceil(H/2).
    """
    arr = _as_map(t)
    h = arr.shape[0]
    if h % 2:
        arr = np.concatenate([arr, arr[-1:]], axis=0)
    return np.maximum(arr[0::2], arr[1::2])


def relu(t) -> np.ndarray:
    return np.maximum(np.asarray(t, dtype=np.float64), 0.0)


def _bilinear_sample(arr: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Sample (H, W, C) at continuous coords; pixel values sit at integer
    coordinates, coords beyond 1px outside the map give 0, nearer ones
    clamp to the border pixel (torchvision RoIAlign semantics)."""
    h, w, _ = arr.shape
    gy = ys[:, None]
    gx = xs[None, :]
    dead = (gy < -1.0) | (gy > h) | (gx < -1.0) | (gx > w)
    cy = np.clip(gy, 0.0, h - 1.0)
    cx = np.clip(gx, 0.0, w - 1.0)
    y0 = np.minimum(np.floor(cy).astype(np.intp), h - 1)
    x0 = np.minimum(np.floor(cx).astype(np.intp), w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (cy - y0)[..., None]
    fx = (cx - x0)[..., None]
    val = (
        arr[y0, x0] * (1 - fy) * (1 - fx)
        + arr[y0, x1] * (1 - fy) * fx
        + arr[y1, x0] * fy * (1 - fx)
        + arr[y1, x1] * fy * fx
    )
    val[dead] = 0.0
    return val


def roi_align(t, box, r: int) -> np.ndarray:
    """Average-pool a box into an (r, r, C) grid of bins.

    box = (x0, y0, x1, y1) in feature coordinates; each bin averages a
    2x2 grid of bilinear samples at regular offsets.  Boxes may extend
    past the borders (far-outside samples contribute 0).
    """
    arr = _as_map(t)
    if r < 1 or int(r) != r:
        raise ShapeError(f"bin count must be a positive integer, got {r}")
    x0, y0, x1, y1 = (float(v) for v in box)
    if not (x1 > x0 and y1 > y0):
        raise ShapeError(f"degenerate box {box}")
    r = int(r)
    bw = (x1 - x0) / r
    bh = (y1 - y0) / r
    # two samples per bin per axis, at 1/4 and 3/4 of the bin
    offsets = (np.arange(2, dtype=np.float64) + 0.5) / 2.0
    xs = (x0 + (np.arange(r, dtype=np.float64)[:, None] + offsets) * bw).ravel()
    ys = (y0 + (np.arange(r, dtype=np.float64)[:, None] + offsets) * bh).ravel()
    vals = _bilinear_sample(arr, xs, ys)
    c = arr.shape[2]
    return vals.reshape(r, 2, r, 2, c).mean(axis=(1, 3))
