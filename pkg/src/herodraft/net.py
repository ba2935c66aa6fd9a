"""Minimal dense feed-forward network with hand-rolled backprop and Adam.

Covers everything both learned models need: ReLU hidden stack, a single
softmax / sigmoid / tanh head or a dual policy(softmax) + value(tanh)
head, cross-entropy / binary-cross-entropy / MSE losses with an L2
penalty, and a portable binary checkpoint format.

Parameters default to float32; loss reductions run in float64.  A
float64 net (``dtype=np.float64``) is used by the finite-difference
gradient tests.
"""

from __future__ import annotations

import json
import struct

import numpy as np

HEADS = ("softmax", "sigmoid", "tanh", "policy_value")
CHECKPOINT_MAGIC = b"JWD1"


class CheckpointError(ValueError):
    pass


def _relu(x):
    return np.maximum(x, 0)


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _log_softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class DenseNet:
    """ReLU MLP with one output head (or the dual policy/value head)."""

    def __init__(self, input_dim: int, hidden: tuple[int, ...], head: str,
                 n_actions: int | None = None, seed: int = 0,
                 dtype=np.float32):
        if head not in HEADS:
            raise ValueError(f"unknown head {head!r}")
        if head in ("softmax", "policy_value") and not n_actions:
            raise ValueError(f"head {head!r} requires n_actions")
        self.input_dim = input_dim
        self.hidden = tuple(hidden)
        self.head = head
        self.n_actions = n_actions if head in ("softmax", "policy_value") else None
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(seed)
        dims = [input_dim, *self.hidden]
        self.trunk = []
        for i in range(len(self.hidden)):
            w = rng.normal(0, np.sqrt(2.0 / dims[i]), (dims[i], dims[i + 1]))
            self.trunk.append([w.astype(self.dtype), np.zeros(dims[i + 1], self.dtype)])
        last = dims[-1]

        def head_layer(out_dim):
            w = rng.normal(0, np.sqrt(1.0 / last), (last, out_dim))
            return [w.astype(self.dtype), np.zeros(out_dim, self.dtype)]

        if head == "policy_value":
            self.heads = [head_layer(self.n_actions), head_layer(1)]
        elif head == "softmax":
            self.heads = [head_layer(self.n_actions)]
        else:
            self.heads = [head_layer(1)]

    # -- parameter access -------------------------------------------------

    def parameters(self) -> list[np.ndarray]:
        """Flat list [W, b, ...], trunk first then head layer(s)."""
        out = []
        for w, b in self.trunk + self.heads:
            out += [w, b]
        return out

    def set_parameters(self, params):
        own = self.parameters()
        if len(own) != len(params):
            raise ValueError("parameter count mismatch")
        layers = self.trunk + self.heads
        i = 0
        for layer in layers:
            for j in range(2):
                if layer[j].shape != params[i].shape:
                    raise ValueError("parameter shape mismatch")
                layer[j] = params[i].astype(self.dtype)
                i += 1

    def copy(self) -> "DenseNet":
        clone = DenseNet(self.input_dim, self.hidden, self.head,
                         self.n_actions, seed=0, dtype=self.dtype)
        clone.set_parameters([p.copy() for p in self.parameters()])
        return clone

    # -- forward ----------------------------------------------------------

    def _trunk_forward(self, x):
        acts = [x]
        h = x
        for w, b in self.trunk:
            h = _relu(h @ w + b)
            acts.append(h)
        return h, acts

    def forward(self, x: np.ndarray):
        """Head output for a batch.

        softmax -> (B, n); sigmoid/tanh -> (B,); policy_value -> ((B, n), (B,)).
        """
        x = np.asarray(x, self.dtype)
        if x.ndim == 1:
            raise ValueError("forward expects a batch of shape (B, input_dim)")
        if x.shape[1] != self.input_dim:
            raise ValueError(f"input width {x.shape[1]} != {self.input_dim}")
        h, _ = self._trunk_forward(x)
        if self.head == "policy_value":
            (wp, bp), (wv, bv) = self.heads
            return _softmax(h @ wp + bp), np.tanh(h @ wv + bv)[:, 0]
        w, b = self.heads[0]
        o = h @ w + b
        if self.head == "softmax":
            return _softmax(o)
        if self.head == "sigmoid":
            return _sigmoid(o)[:, 0]
        return np.tanh(o)[:, 0]

    # -- loss and gradients ----------------------------------------------

    def loss_and_grads(self, x, targets, loss: str, l2: float = 0.0):
        """Mean batch loss (+ L2 penalty) and gradients, param-aligned.

        loss: "ce" (softmax, distribution targets), "bce" (sigmoid, 0/1
        labels), "mse" (tanh head), "policy_value" (targets = (pi, z)).
        Returns (total_loss, grads, components) with float64 reductions.
        """
        x = np.asarray(x, self.dtype)
        n = x.shape[0]
        h, acts = self._trunk_forward(x)
        components = {}

        head_grads = []
        if loss == "policy_value":
            pi, z = targets
            pi = np.asarray(pi, self.dtype)
            z = np.asarray(z, self.dtype)
            (wp, bp), (wv, bv) = self.heads
            logits = h @ wp + bp
            v = np.tanh(h @ wv + bv)[:, 0]
            logp = _log_softmax(logits)
            ce = -float(np.sum(pi.astype(np.float64) * logp.astype(np.float64)) / n)
            mse = float(np.mean((z.astype(np.float64) - v.astype(np.float64)) ** 2))
            components = {"policy_ce": ce, "value_mse": mse}
            data_loss = ce + mse
            dlogits = ((_softmax(logits) - pi) / n).astype(self.dtype)
            dov = (2.0 * (v - z) * (1.0 - v ** 2) / n).astype(self.dtype)[:, None]
            head_grads = [(wp, bp, dlogits), (wv, bv, dov)]
            dh = dlogits @ wp.T + dov @ wv.T
        else:
            w, b = self.heads[0]
            o = h @ w + b
            if loss == "ce":
                pi = np.asarray(targets, self.dtype)
                logp = _log_softmax(o)
                data_loss = -float(np.sum(pi.astype(np.float64) * logp.astype(np.float64)) / n)
                do = ((_softmax(o) - pi) / n).astype(self.dtype)
            elif loss == "bce":
                y = np.asarray(targets, self.dtype)[:, None]
                # softplus(o) - y*o, stable for either sign of o
                sp = np.logaddexp(0.0, o.astype(np.float64))
                data_loss = float(np.mean(sp - y.astype(np.float64) * o.astype(np.float64)))
                do = ((_sigmoid(o) - y) / n).astype(self.dtype)
            elif loss == "mse":
                z = np.asarray(targets, self.dtype)[:, None]
                v = np.tanh(o)
                data_loss = float(np.mean((z.astype(np.float64) - v.astype(np.float64)) ** 2))
                do = (2.0 * (v - z) * (1.0 - v ** 2) / (n * z.shape[1])).astype(self.dtype)
            else:
                raise ValueError(f"unknown loss {loss!r}")
            components = {loss: data_loss}
            head_grads = [(w, b, do)]
            dh = do @ w.T

        grads_heads = []
        for w, b, dout in head_grads:
            grads_heads += [h.T @ dout, dout.sum(axis=0)]

        grads_trunk = []
        for i in reversed(range(len(self.trunk))):
            w, b = self.trunk[i]
            pre_act_grad = dh * (acts[i + 1] > 0)
            grads_trunk = [acts[i].T @ pre_act_grad, pre_act_grad.sum(axis=0)] + grads_trunk
            dh = pre_act_grad @ w.T

        grads = grads_trunk + grads_heads
        total = data_loss
        if l2:
            params = self.parameters()
            total += l2 * float(sum(np.sum(p.astype(np.float64) ** 2) for p in params))
            grads = [g + 2.0 * l2 * p for g, p in zip(grads, params)]
        if not np.isfinite(total):
            norms = [float(np.abs(p).max()) for p in self.parameters()]
            raise FloatingPointError(
                f"non-finite loss {total}; max-abs params per tensor: {norms}")
        return total, grads, components


class AdamState:
    """Adam moment buffers for one net's parameter list."""

    def __init__(self, net: DenseNet, lr: float = 1e-4, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.step_count = 0
        self.m = [np.zeros_like(p) for p in net.parameters()]
        self.v = [np.zeros_like(p) for p in net.parameters()]

    def apply(self, net: DenseNet, grads):
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        params = net.parameters()
        new = []
        for p, g, m, v in zip(params, grads, self.m, self.v):
            g = g.astype(p.dtype)
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            mhat = m / bc1
            vhat = v / bc2
            new.append(p - (self.lr * mhat / (np.sqrt(vhat) + self.eps)).astype(p.dtype))
        net.set_parameters(new)


def train_step(net: DenseNet, adam: AdamState, x, targets, loss: str,
               l2: float = 0.0):
    """One Adam step on the mean batch loss; returns the pre-update loss."""
    value, grads, components = net.loss_and_grads(x, targets, loss, l2)
    adam.apply(net, grads)
    return value, components


# -- checkpoints ----------------------------------------------------------

def save_checkpoint(net: DenseNet, path, adam: AdamState | None = None,
                    metadata: dict | None = None):
    header = {
        "version": 1,
        "input_dim": net.input_dim,
        "hidden": list(net.hidden),
        "head": net.head,
        "n_actions": net.n_actions,
        "dtype": net.dtype.name,
        "metadata": metadata or {},
        "adam": adam is not None,
    }
    if adam is not None:
        header["adam_state"] = {
            "lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2,
            "eps": adam.eps, "step": adam.step_count,
        }
    blob = b"".join(np.ascontiguousarray(p).astype(net.dtype.newbyteorder("<")).tobytes()
                    for p in net.parameters())
    if adam is not None:
        blob += b"".join(np.ascontiguousarray(a).astype(net.dtype.newbyteorder("<")).tobytes()
                         for a in adam.m + adam.v)
    hjson = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", len(hjson)))
        f.write(hjson)
        f.write(blob)


def load_checkpoint(path, expected_config_hash: str | None = None,
                    strict: bool = False):
    """Returns (net, adam_or_none, metadata)."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError("bad magic bytes; not a checkpoint file")
    if len(raw) < 8:
        raise CheckpointError("truncated header")
    (hlen,) = struct.unpack("<I", raw[4:8])
    if len(raw) < 8 + hlen:
        raise CheckpointError("truncated header")
    header = json.loads(raw[8:8 + hlen].decode())
    if header.get("version") != 1:
        raise CheckpointError(f"unsupported version {header.get('version')}")
    meta = header.get("metadata", {})
    if strict and expected_config_hash is not None:
        if meta.get("config_hash") != expected_config_hash:
            raise CheckpointError(
                f"config hash mismatch: checkpoint {meta.get('config_hash')} "
                f"!= expected {expected_config_hash}")
    net = DenseNet(header["input_dim"], tuple(header["hidden"]), header["head"],
                   header["n_actions"], dtype=np.dtype(header["dtype"]))
    shapes = [p.shape for p in net.parameters()]
    itemsize = net.dtype.itemsize
    n_params = sum(int(np.prod(s)) for s in shapes)
    n_tensors = n_params * (3 if header["adam"] else 1)
    body = raw[8 + hlen:]
    if len(body) != n_tensors * itemsize:
        raise CheckpointError(
            f"parameter blob size {len(body)} != expected {n_tensors * itemsize}")
    flat = np.frombuffer(body, dtype=net.dtype.newbyteorder("<"))

    def take(offset):
        arrs = []
        for s in shapes:
            k = int(np.prod(s))
            arrs.append(flat[offset:offset + k].reshape(s).astype(net.dtype))
            offset += k
        return arrs, offset

    params, off = take(0)
    net.set_parameters(params)
    adam = None
    if header["adam"]:
        st = header["adam_state"]
        adam = AdamState(net, lr=st["lr"], beta1=st["beta1"], beta2=st["beta2"],
                         eps=st["eps"])
        adam.step_count = st["step"]
        adam.m, off = take(off)
        adam.v, off = take(off)
    return net, adam, meta
