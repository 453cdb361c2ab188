"""Minimal deterministic reverse-mode differentiation engine.

Covers exactly the operations the model needs: dense matmul, constant
sparse-times-dense products, sparse products with differentiable values,
elementwise activations, gathers/scatters, reductions, the two losses, and
Adam. Values are plain numpy arrays; the graph is built eagerly and swept
once in reverse topological (construction) order, so gradient accumulation
order is fixed and runs are bitwise reproducible.

Global precision flag: 64-bit for gradient-check mode, 32-bit for benchmark
mode (`set_dtype`).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, LengthMismatch, NonScalarLoss, ShapeMismatch

_DTYPE = np.float64


def set_dtype(dtype):
    """Set global compute precision (np.float32 or np.float64)."""
    global _DTYPE
    assert dtype in (np.float32, np.float64)
    _DTYPE = dtype


def get_dtype():
    return _DTYPE


class Tensor:
    """One node of the computation graph."""

    __slots__ = ("value", "grad", "parents", "_backward", "requires_grad", "op")

    def __init__(self, value, parents=(), backward=None, requires_grad=False, op=""):
        self.value = np.asarray(value)
        self.grad = None
        self.parents = parents
        self._backward = backward
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.op = op

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad = None

    def backward(self):
        """Reverse sweep from a scalar loss; fills .grad on every node that
        requires gradients."""
        if self.value.shape != ():
            raise NonScalarLoss(f"backward() needs a scalar, got shape {self.value.shape}")
        topo, seen = [], set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones((), dtype=self.value.dtype)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def param(value):
    """Wrap an array as a trainable parameter in the engine dtype."""
    return Tensor(np.array(value, dtype=_DTYPE), requires_grad=True, op="param")


def constant(value):
    return Tensor(np.asarray(value, dtype=_DTYPE), op="const")


def _as_tensor(x):
    return x if isinstance(x, Tensor) else constant(x)


def _accum(t: Tensor, g):
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.array(g, dtype=t.value.dtype, copy=True)
    else:
        t.grad += g


# -- arithmetic -------------------------------------------------------------


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape and a.shape != () and b.shape != ():
        raise ShapeMismatch(f"add {a.shape} vs {b.shape}")
    out = Tensor(a.value + b.value, (a, b), op="add")

    def backward(g):
        _accum(a, g if a.shape == out.shape else g.sum())
        _accum(b, g if b.shape == out.shape else g.sum())

    out._backward = backward
    return out


def sub(a, b):
    return add(a, neg(b))


def neg(a):
    a = _as_tensor(a)
    out = Tensor(-a.value, (a,), op="neg")
    out._backward = lambda g: _accum(a, -g)
    return out


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape and a.shape != () and b.shape != ():
        raise ShapeMismatch(f"mul {a.shape} vs {b.shape}")
    out = Tensor(a.value * b.value, (a, b), op="mul")

    def backward(g):
        ga, gb = g * b.value, g * a.value
        _accum(a, ga if a.shape == out.shape else ga.sum())
        _accum(b, gb if b.shape == out.shape else gb.sum())

    out._backward = backward
    return out


def div(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.value / b.value, (a, b), op="div")

    def backward(g):
        ga = g / b.value
        gb = -g * a.value / (b.value * b.value)
        _accum(a, ga if a.shape == out.shape else ga.sum())
        _accum(b, gb if b.shape == out.shape else gb.sum())

    out._backward = backward
    return out


def scale(a, c: float):
    a = _as_tensor(a)
    out = Tensor(a.value * c, (a,), op="scale")
    out._backward = lambda g: _accum(a, g * c)
    return out


def powc(a, p: float):
    """Elementwise power with a constant exponent."""
    a = _as_tensor(a)
    out = Tensor(a.value ** p, (a,), op="pow")
    out._backward = lambda g: _accum(a, g * p * a.value ** (p - 1.0))
    return out


def sqrt(a):
    a = _as_tensor(a)
    v = np.sqrt(a.value)
    out = Tensor(v, (a,), op="sqrt")
    out._backward = lambda g: _accum(a, g * 0.5 / v)
    return out


# -- linear algebra ----------------------------------------------------------


def matmul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    if a.value.shape[-1] != b.value.shape[0]:
        raise DimensionMismatch(f"matmul {a.shape} @ {b.shape}")
    out = Tensor(a.value @ b.value, (a, b), op="matmul")

    def backward(g):
        _accum(a, g @ b.value.T)
        _accum(b, a.value.T @ g)

    out._backward = backward
    return out


def sparse_matmul(a_const, b):
    """Product of a constant scipy sparse matrix with a dense Tensor."""
    b = _as_tensor(b)
    if a_const.shape[1] != b.value.shape[0]:
        raise DimensionMismatch(f"sparse_matmul {a_const.shape} @ {b.shape}")
    out = Tensor(a_const @ b.value, (b,), op="spmm")
    at = a_const.T.tocsr()
    out._backward = lambda g: _accum(b, at @ g)
    return out


def weighted_spmm(vals, rows, cols, n: int, x):
    """(sparse matrix with differentiable values) @ x.

    `rows`/`cols` are constant index arrays over an n-by-n matrix; `vals`
    carries the corresponding nonzero values and receives gradients.
    """
    vals, x = _as_tensor(vals), _as_tensor(x)
    mat = sp.csr_matrix((vals.value, (rows, cols)), shape=(n, n))
    # duplicate (row, col) entries would be summed by scipy but break the
    # simple gradient below; callers must pass unique coordinates
    if mat.nnz != len(vals.value):
        raise ShapeMismatch("duplicate coordinates in weighted_spmm")
    out = Tensor(mat @ x.value, (vals, x), op="wspmm")

    def backward(g):
        _accum(vals, (g[rows] * x.value[cols]).sum(axis=1))
        _accum(x, mat.T.tocsr() @ g)

    out._backward = backward
    return out


def gather_rows(x, idx):
    x = _as_tensor(x)
    idx = np.asarray(idx, dtype=np.int64)
    out = Tensor(x.value[idx], (x,), op="gather")

    def backward(g):
        gx = np.zeros_like(x.value)
        np.add.at(gx, idx, g)
        _accum(x, gx)

    out._backward = backward
    return out


def scatter_add(src, idx, size: int):
    """out[k] = sum of src where idx == k; src is a 1-D Tensor."""
    src = _as_tensor(src)
    idx = np.asarray(idx, dtype=np.int64)
    v = np.bincount(idx, weights=src.value.astype(np.float64), minlength=size)
    out = Tensor(v.astype(src.value.dtype), (src,), op="scatter_add")
    out._backward = lambda g: _accum(src, g[idx])
    return out


def concat(parts):
    """Concatenate 1-D tensors."""
    parts = [_as_tensor(p) for p in parts]
    out = Tensor(np.concatenate([p.value for p in parts]), tuple(parts), op="concat")
    sizes = [len(p.value) for p in parts]

    def backward(g):
        ofs = 0
        for p, s in zip(parts, sizes):
            _accum(p, g[ofs:ofs + s])
            ofs += s

    out._backward = backward
    return out


def rowdot(a, b):
    """Row-wise inner products of two equally shaped matrices -> vector."""
    a, b = _as_tensor(a), _as_tensor(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"rowdot {a.shape} vs {b.shape}")
    out = Tensor((a.value * b.value).sum(axis=1), (a, b), op="rowdot")

    def backward(g):
        _accum(a, g[:, None] * b.value)
        _accum(b, g[:, None] * a.value)

    out._backward = backward
    return out


# -- activations and reductions ----------------------------------------------


def relu(x):
    x = _as_tensor(x)
    mask = x.value > 0
    out = Tensor(np.where(mask, x.value, 0.0), (x,), op="relu")
    out._backward = lambda g: _accum(x, g * mask)
    return out


def prelu(x, slope):
    """PReLU with a learnable scalar slope."""
    x, slope = _as_tensor(x), _as_tensor(slope)
    pos = x.value > 0
    out = Tensor(np.where(pos, x.value, slope.value * x.value), (x, slope), op="prelu")

    def backward(g):
        _accum(x, g * np.where(pos, 1.0, slope.value))
        _accum(slope, (g * np.where(pos, 0.0, x.value)).sum())

    out._backward = backward
    return out


def softplus(x):
    """log(1 + exp(x)), computed stably."""
    x = _as_tensor(x)
    v = np.maximum(x.value, 0.0) + np.log1p(np.exp(-np.abs(x.value)))
    out = Tensor(v, (x,), op="softplus")
    sig = 1.0 / (1.0 + np.exp(-x.value))
    out._backward = lambda g: _accum(x, g * sig)
    return out


def sum_all(x):
    x = _as_tensor(x)
    out = Tensor(np.asarray(x.value.sum(), dtype=x.value.dtype), (x,), op="sum")
    out._backward = lambda g: _accum(x, np.broadcast_to(g, x.shape))
    return out


def mean_all(x):
    x = _as_tensor(x)
    return scale(sum_all(x), 1.0 / x.value.size)


# -- losses -------------------------------------------------------------------


def bce_with_logits(logits, targets):
    """Mean binary cross-entropy over sigmoid(logits), in stable form."""
    logits = _as_tensor(logits)
    t = np.asarray(targets, dtype=logits.value.dtype)
    z = logits.value
    if z.shape != t.shape:
        raise LengthMismatch(f"bce_with_logits {z.shape} vs {t.shape}")
    per = np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))
    out = Tensor(np.asarray(per.mean(), dtype=z.dtype), (logits,), op="bce")
    sig = 1.0 / (1.0 + np.exp(-z))
    out._backward = lambda g: _accum(logits, g * (sig - t) / z.size)
    return out


def softmax_cross_entropy(logits, labels):
    """Mean of -log softmax(row)[label] with max-subtraction stability."""
    logits = _as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    z = logits.value
    n, c = z.shape
    if labels.min() < 0 or labels.max() >= c:
        from .errors import BadLabel

        raise BadLabel(f"label outside [0, {c})")
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    logsumexp = np.log(ez.sum(axis=1)) + zmax.ravel()
    per = logsumexp - z[np.arange(n), labels]
    out = Tensor(np.asarray(per.mean(), dtype=z.dtype), (logits,), op="sce")
    softmax = ez / ez.sum(axis=1, keepdims=True)

    def backward(g):
        gz = softmax.copy()
        gz[np.arange(n), labels] -= 1.0
        _accum(logits, g * gz / n)

    out._backward = backward
    return out


# -- optimizer ------------------------------------------------------------------


class Adam:
    """Classic Adam with L2 weight decay folded into the gradient."""

    def __init__(self, params, lr=1e-2, weight_decay=0.0, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.value)
            if g.shape != p.value.shape:
                raise ShapeMismatch(f"grad shape {g.shape} vs param {p.value.shape}")
            if self.weight_decay:
                g = g + self.weight_decay * p.value
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g * g
            m_hat = self.m[i] / (1 - b1 ** self.t)
            v_hat = self.v[i] / (1 - b2 ** self.t)
            p.value = p.value - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def glorot(rng, fan_in: int, fan_out: int):
    """Uniform Glorot initialization in the engine dtype."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(_DTYPE)
