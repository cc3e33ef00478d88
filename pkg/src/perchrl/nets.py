"""Small dense networks with hand-rolled reverse-mode gradients.

Everything trainable here is a stack of linear layers with tanh hidden
activations and a linear output, small enough (two 64-wide hidden layers)
that a specialized numpy forward/backward beats pulling in an autodiff
framework. Gradients are exact and are verified against central finite
differences in the test suite.
"""

import numpy as np


class DenseNet:
    """Fully-connected tanh network; parameters live in ``params`` as the
    flat list [W0, b0, W1, b1, ...], shared by reference with optimizers."""

    def __init__(self, sizes: tuple[int, ...], rng: np.random.Generator,
                 out_scale: float = 1.0):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.params: list[np.ndarray] = []
        last = len(sizes) - 2
        for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            limit = np.sqrt(6.0 / (n_in + n_out))
            w = rng.uniform(-limit, limit, size=(n_in, n_out))
            if i == last:
                w *= out_scale
            self.params.append(w)
            self.params.append(np.zeros(n_out))

    @property
    def n_layers(self) -> int:
        return len(self.sizes) - 1

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = x
        for i in range(self.n_layers):
            w, b = self.params[2 * i], self.params[2 * i + 1]
            h = h @ w + b
            if i < self.n_layers - 1:
                h = np.tanh(h)
        return h

    def forward_cached(self, x: np.ndarray):
        """Forward pass keeping per-layer inputs for backward()."""
        acts = [x]
        h = x
        for i in range(self.n_layers):
            w, b = self.params[2 * i], self.params[2 * i + 1]
            h = h @ w + b
            if i < self.n_layers - 1:
                h = np.tanh(h)
                acts.append(h)
        return h, acts

    def backward(self, acts: list[np.ndarray], grad_out: np.ndarray):
        """Gradients of sum(grad_out * output) w.r.t. params and input.

        ``acts`` is the cache from forward_cached; returns (grads, grad_x)
        with grads in the same layout as ``params``.
        """
        grads: list[np.ndarray | None] = [None] * len(self.params)
        delta = grad_out
        for i in range(self.n_layers - 1, -1, -1):
            w = self.params[2 * i]
            h_in = acts[i]
            grads[2 * i] = h_in.T @ delta
            grads[2 * i + 1] = delta.sum(axis=0)
            delta = delta @ w.T
            if i > 0:
                delta = delta * (1.0 - acts[i] ** 2)
        return grads, delta

    def input_gradient(self, acts: list[np.ndarray],
                       grad_out: np.ndarray) -> np.ndarray:
        """Gradient of sum(grad_out * output) w.r.t. the input only."""
        delta = grad_out
        for i in range(self.n_layers - 1, -1, -1):
            delta = delta @ self.params[2 * i].T
            if i > 0:
                delta = delta * (1.0 - acts[i] ** 2)
        return delta

    def copy(self) -> "DenseNet":
        dup = object.__new__(DenseNet)
        dup.sizes = self.sizes
        dup.params = [p.copy() for p in self.params]
        return dup

    @classmethod
    def from_params(cls, params: list[np.ndarray]) -> "DenseNet":
        """Rebuild a network around existing parameter arrays (not copied)."""
        if len(params) < 2 or len(params) % 2 != 0:
            raise ValueError("expected alternating weight/bias arrays")
        sizes = [params[0].shape[0]]
        for i in range(0, len(params), 2):
            w, b = params[i], params[i + 1]
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ValueError("inconsistent layer shapes")
            if w.shape[0] != sizes[-1]:
                raise ValueError("layer input does not match previous output")
            sizes.append(w.shape[1])
        net = object.__new__(cls)
        net.sizes = tuple(sizes)
        net.params = list(params)
        return net

    def set_params(self, params: list[np.ndarray]) -> None:
        if len(params) != len(self.params):
            raise ValueError("parameter count mismatch")
        for mine, new in zip(self.params, params):
            if mine.shape != new.shape:
                raise ValueError("parameter shape mismatch")
            mine[...] = new


def soft_update(target_params: list[np.ndarray], online_params: list[np.ndarray],
                rho: float) -> None:
    """Polyak in-place update: target <- rho * online + (1 - rho) * target."""
    if len(target_params) != len(online_params):
        raise ValueError("parameter count mismatch")
    for t, o in zip(target_params, online_params):
        t *= (1.0 - rho)
        t += rho * o


class Adam:
    """Adam over a list of parameter arrays, updating them in place."""

    def __init__(self, params: list[np.ndarray], lr: float = 3e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
