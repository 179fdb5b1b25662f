"""Independent reference implementations used as test oracles.

Everything here is deliberately written as plain nested loops or scalar
arithmetic, sharing no code with the engine's vectorized kernels.
"""
import numpy as np


def conv2d_loops(x, kernel, bias, stride=1, padding=0):
    """Direct 7-loop cross-correlation."""
    n, cin, h, w = x.shape
    cout, _, kh, kw = kernel.shape
    hp, wp = h + 2 * padding, w + 2 * padding
    xp = np.zeros((n, cin, hp, wp), dtype=x.dtype)
    xp[:, :, padding:padding + h, padding:padding + w] = x
    ho = (hp - kh) // stride + 1
    wo = (wp - kw) // stride + 1
    out = np.zeros((n, cout, ho, wo), dtype=x.dtype)
    for b in range(n):
        for co in range(cout):
            for i in range(ho):
                for j in range(wo):
                    acc = 0.0
                    for ci in range(cin):
                        for a in range(kh):
                            for bb in range(kw):
                                acc += xp[b, ci, i * stride + a, j * stride + bb] * \
                                       kernel[co, ci, a, bb]
                    out[b, co, i, j] = acc + bias[co]
    return out


def maxpool2d_loops(x, window, stride):
    """Nested-loop max pooling returning values and flat input indices."""
    n, c, h, w = x.shape
    ho = (h - window) // stride + 1
    wo = (w - window) // stride + 1
    out = np.zeros((n, c, ho, wo), dtype=x.dtype)
    idx = np.zeros((n, c, ho, wo), dtype=np.int64)
    for b in range(n):
        for ch in range(c):
            for i in range(ho):
                for j in range(wo):
                    best = -np.inf
                    best_pos = -1
                    for a in range(window):
                        for bb in range(window):
                            r, cc = i * stride + a, j * stride + bb
                            if x[b, ch, r, cc] > best:
                                best = x[b, ch, r, cc]
                                best_pos = r * w + cc
                    out[b, ch, i, j] = best
                    idx[b, ch, i, j] = best_pos
    return out, idx


def matmul_loops(a, b):
    """Triple-loop matrix product."""
    m, k = a.shape
    _, p = b.shape
    out = np.zeros((m, p), dtype=a.dtype)
    for i in range(m):
        for j in range(p):
            acc = 0.0
            for kk in range(k):
                acc += a[i, kk] * b[kk, j]
            out[i, j] = acc
    return out


def resize_bilinear_scalar(image, out_h, out_w):
    """Per-pixel scalar bilinear interpolation, half-pixel centers."""
    c, h, w = image.shape
    out = np.zeros((c, out_h, out_w), dtype=image.dtype)
    for ch in range(c):
        for i in range(out_h):
            for j in range(out_w):
                sy = min(max((i + 0.5) * (h / out_h) - 0.5, 0.0), h - 1)
                sx = min(max((j + 0.5) * (w / out_w) - 0.5, 0.0), w - 1)
                y0, x0 = int(np.floor(sy)), int(np.floor(sx))
                y1, x1 = min(y0 + 1, h - 1), min(x0 + 1, w - 1)
                fy, fx = sy - y0, sx - x0
                top = image[ch, y0, x0] + fx * (image[ch, y0, x1] - image[ch, y0, x0])
                bot = image[ch, y1, x0] + fx * (image[ch, y1, x1] - image[ch, y1, x0])
                out[ch, i, j] = top + fy * (bot - top)
    return out


def adam_scalar_steps(theta0, grad_fn, steps, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
    """Scalar-loop Adam over a list of parameters, one float each.

    grad_fn maps the current parameter list to a list of gradients.
    Returns the parameter trajectory, one list per step.
    """
    theta = list(theta0)
    m = [0.0] * len(theta)
    v = [0.0] * len(theta)
    trajectory = []
    for t in range(1, steps + 1):
        g = grad_fn(theta)
        for i in range(len(theta)):
            m[i] = beta1 * m[i] + (1 - beta1) * g[i]
            v[i] = beta2 * v[i] + (1 - beta2) * g[i] ** 2
            m_hat = m[i] / (1 - beta1 ** t)
            v_hat = v[i] / (1 - beta2 ** t)
            theta[i] = theta[i] - lr * m_hat / (v_hat ** 0.5 + eps)
        trajectory.append(list(theta))
    return trajectory


def central_diff(f, x, h=1e-5):
    """Central-difference gradient of scalar f at array x, elementwise."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + h
        fp = f(x)
        flat[i] = old - h
        fm = f(x)
        flat[i] = old
        gflat[i] = (fp - fm) / (2 * h)
    return grad


def max_component_rel_err(analytic, numeric, floor=1e-8):
    """Worst per-component relative error with a small denominator floor."""
    a = np.asarray(analytic).ravel()
    n = np.asarray(numeric).ravel()
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float((np.abs(a - n) / denom).max())


def tensor_rel_err(analytic, numeric):
    """Tensor-level relative error: max abs difference over the larger norm.

    The per-component ratio is meaningless for components at the
    finite-difference noise floor, so deep-composition checks compare at
    the tensor scale.
    """
    a = np.asarray(analytic)
    n = np.asarray(numeric)
    scale = max(np.abs(a).max(), np.abs(n).max(), 1e-12)
    return float(np.abs(a - n).max() / scale)
