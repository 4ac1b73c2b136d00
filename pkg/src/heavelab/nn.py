"""Minimal dense-network engine: forward, backprop, Adam, checkpoints.

Networks are plain lists of (weight, bias) pairs with a per-layer
activation name.  Weights have shape (n_in, n_out) so a batch forward
is x @ W + b with x of shape (batch, n_in); single samples may be
passed as 1-D vectors.  Everything runs in float64.

Initialization is fan-in uniform, U(-1/sqrt(n_in), +1/sqrt(n_in)) for
both weights and biases, with an optional small uniform scale for the
final layer so an output head starts near zero.

Checkpoints are a text header followed by raw little-endian float64
blocks.  Header lines, in order: the magic ``heavelab-checkpoint 1``,
free-form ``key = value`` metadata, one ``net = <name> <widths>
<activations>`` line per network, one ``opt = <name> <net names>
t=<t> lr=<lr> beta1=<b1> beta2=<b2> eps=<eps>`` line per optimizer,
then ``end-header``.  The binary section holds each network's layers in
listed order (weights row-major, then biases), followed for each
optimizer by all first-moment blocks and then all second-moment blocks
mirroring its networks' parameter order.  Headers carry no timestamps,
so identical runs write identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CHECKPOINT_MAGIC = "heavelab-checkpoint"
CHECKPOINT_VERSION = 1

ACTIVATIONS = ("relu", "tanh", "linear")


@dataclass
class Mlp:
    """Fully connected layer stack."""

    weights: list  # of (n_in, n_out) arrays
    biases: list  # of (n_out,) arrays
    activations: list  # of names from ACTIVATIONS, one per layer

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise ValueError("layer lists must share one length")
        for act in self.activations:
            if act not in ACTIVATIONS:
                raise ValueError("unknown activation %r" % act)

    @property
    def widths(self) -> list:
        """Layer widths, input first."""
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def param_list(self) -> list:
        """Parameters in serialization order: per layer W then b."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out


@dataclass
class GradientBundle:
    """Parameter and input gradients from one backward pass."""

    d_weights: list
    d_biases: list
    d_input: np.ndarray

    def param_list(self) -> list:
        out = []
        for dw, db in zip(self.d_weights, self.d_biases):
            out.append(dw)
            out.append(db)
        return out


def init_mlp(
    widths,
    activations,
    rng,
    final_scale: float | None = None,
) -> Mlp:
    """Build a network with fan-in uniform initialization.

    Args:
        widths: layer widths, input first (len = layers + 1).
        activations: one activation name per layer.
        rng: seed or np.random.Generator.
        final_scale: if given, the last layer's weights and bias draw
            from U(-final_scale, +final_scale) instead.

    Draw order is fixed (per layer: weights then bias) so a seed pins
    the parameters.
    """
    if len(activations) != len(widths) - 1:
        raise ValueError("need one activation per layer")
    rng = np.random.default_rng(rng)
    weights = []
    biases = []
    n_layers = len(widths) - 1
    for layer in range(n_layers):
        n_in, n_out = widths[layer], widths[layer + 1]
        scale = 1.0 / np.sqrt(n_in)
        if final_scale is not None and layer == n_layers - 1:
            scale = final_scale
        weights.append(rng.uniform(-scale, scale, size=(n_in, n_out)))
        biases.append(rng.uniform(-scale, scale, size=n_out))
    return Mlp(weights=weights, biases=biases, activations=list(activations))


def _apply_activation(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _activation_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "relu":
        # boolean mask; multiplying by it is multiplying by 1.0 / 0.0
        return z > 0.0
    if name == "tanh":
        return 1.0 - a * a
    return np.ones_like(z)


def forward_cached(net: Mlp, x: np.ndarray):
    """Forward pass keeping per-layer inputs and pre-activations.

    Returns (output, caches); caches feed :func:`backward_cached`.
    Input may be (n,) or (batch, n); the cache is always 2-D and the
    output matches the input's dimensionality.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    h = x[None, :] if single else x
    caches = []
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = h @ w
        z += b
        a = _apply_activation(act, z)
        caches.append((h, z, a))
        h = a
    return (h[0] if single else h), caches


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    """Network output for a single input or a batch."""
    y, _ = forward_cached(net, x)
    return y


def backward_cached(
    net: Mlp, caches, upstream: np.ndarray, want_params: bool = True
) -> GradientBundle:
    """Backpropagate an upstream gradient through cached activations.

    upstream is dL/d(output), shaped like the cached output.  Parameter
    gradients are summed over the batch.  With want_params=False only
    the input gradient is propagated (the parameter lists come back
    empty), which halves the work when a network is used purely as a
    differentiable map.
    """
    delta = np.asarray(upstream, dtype=float)
    single = delta.ndim == 1
    if single:
        delta = delta[None, :]
    d_weights = [None] * len(net.weights)
    d_biases = [None] * len(net.biases)
    owned = False  # True once delta is a private buffer safe to overwrite
    for layer in range(len(net.weights) - 1, -1, -1):
        h, z, a = caches[layer]
        act = net.activations[layer]
        if act != "linear":  # the linear gradient is 1, delta passes through
            grad = _activation_grad(act, z, a)
            if owned:
                np.multiply(delta, grad, out=delta)
            else:
                delta = delta * grad
                owned = True
        if want_params:
            d_weights[layer] = h.T @ delta
            d_biases[layer] = delta.sum(axis=0)
        delta = delta @ net.weights[layer].T
        owned = True
    if not want_params:
        d_weights = []
        d_biases = []
    return GradientBundle(
        d_weights=d_weights,
        d_biases=d_biases,
        d_input=delta[0] if single else delta,
    )


def backward(net: Mlp, x: np.ndarray, upstream: np.ndarray) -> GradientBundle:
    """Gradients of sum(upstream * output) w.r.t. parameters and input."""
    _, caches = forward_cached(net, x)
    return backward_cached(net, caches, upstream)


@dataclass
class AdamState:
    """Adam moment accumulators for an ordered parameter list."""

    m: list
    v: list
    t: int
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params: list, lr: float, beta1=0.9, beta2=0.999, eps=1e-8) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        t=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_update(params: list, grads: list, opt: AdamState) -> None:
    """One bias-corrected Adam step, in place on the parameter arrays.

    With beta1 = beta2 = 0 this reduces to sign-normalized gradient
    descent, update = -lr g / (|g| + eps).  Two scratch buffers per
    parameter live on the optimizer state so the hot loop allocates
    nothing; the in-place steps keep the operand pairing of the plain
    expression lr (m/bc1) / (sqrt(v/bc2) + eps), so results match it
    bit for bit.
    """
    if len(params) != len(opt.m) or len(grads) != len(opt.m):
        raise ValueError("parameter, gradient, and moment lists must align")
    scratch = getattr(opt, "_scratch", None)
    if scratch is None or len(scratch) != len(opt.m):
        scratch = [(np.empty_like(p), np.empty_like(p)) for p in opt.m]
        opt._scratch = scratch
    opt.t += 1
    bc1 = 1.0 - opt.beta1**opt.t
    bc2 = 1.0 - opt.beta2**opt.t
    for p, g, m, v, (t1, t2) in zip(params, grads, opt.m, opt.v, scratch):
        m *= opt.beta1
        np.multiply(g, 1.0 - opt.beta1, out=t1)
        m += t1
        v *= opt.beta2
        np.multiply(g, g, out=t1)
        t1 *= 1.0 - opt.beta2
        v += t1
        np.divide(v, bc2, out=t1)
        np.sqrt(t1, out=t1)
        t1 += opt.eps
        np.divide(m, bc1, out=t2)
        t2 *= opt.lr
        t2 /= t1
        p -= t2


def _format_net_line(name: str, net: Mlp) -> str:
    widths = ",".join(str(w) for w in net.widths)
    acts = ",".join(net.activations)
    return "net = %s %s %s" % (name, widths, acts)


def _format_opt_line(name: str, net_names, opt: AdamState) -> str:
    return "opt = %s %s t=%d lr=%.17g beta1=%.17g beta2=%.17g eps=%.17g" % (
        name,
        ",".join(net_names),
        opt.t,
        opt.lr,
        opt.beta1,
        opt.beta2,
        opt.eps,
    )


def write_checkpoint(path, header_items, nets, opts=()) -> None:
    """Serialize networks and optimizer state.

    Args:
        path: destination file.
        header_items: iterable of (key, value) metadata pairs, written
            in order as ``key = value``.
        nets: iterable of (name, Mlp), order defines the binary layout.
        opts: iterable of (name, net_names, AdamState) where net_names
            lists which networks' parameters the optimizer tracks.
    """
    nets = list(nets)
    opts = list(opts)
    lines = ["%s %d" % (CHECKPOINT_MAGIC, CHECKPOINT_VERSION)]
    for key, value in header_items:
        lines.append("%s = %s" % (key, value))
    for name, net in nets:
        lines.append(_format_net_line(name, net))
    for name, net_names, opt in opts:
        lines.append(_format_opt_line(name, net_names, opt))
    lines.append("end-header")
    blobs = []
    for _, net in nets:
        for p in net.param_list():
            blobs.append(np.ascontiguousarray(p, dtype="<f8").tobytes())
    for _, _, opt in opts:
        for moments in (opt.m, opt.v):
            for p in moments:
                blobs.append(np.ascontiguousarray(p, dtype="<f8").tobytes())
    with open(path, "wb") as f:
        f.write("\n".join(lines).encode() + b"\n")
        for blob in blobs:
            f.write(blob)


def read_checkpoint(path):
    """Inverse of :func:`write_checkpoint`.

    Returns (header, nets, opts): header is a dict of the metadata
    pairs, nets maps name -> Mlp in file order, opts maps name ->
    (net_names, AdamState).
    """
    with open(path, "rb") as f:
        raw = f.read()
    marker = b"end-header\n"
    cut = raw.find(marker)
    if cut < 0:
        raise ValueError("not a checkpoint file (missing end-header): %s" % path)
    text = raw[:cut].decode()
    blob = raw[cut + len(marker):]
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CHECKPOINT_MAGIC):
        raise ValueError("not a checkpoint file (bad magic): %s" % path)
    version = int(lines[0].split()[1])
    if version != CHECKPOINT_VERSION:
        raise ValueError("unsupported checkpoint version %d" % version)
    header = {}
    net_specs = []
    opt_specs = []
    for line in lines[1:]:
        if line.startswith("net = "):
            name, widths, acts = line[len("net = "):].split(" ")
            net_specs.append(
                (name, [int(w) for w in widths.split(",")], acts.split(","))
            )
        elif line.startswith("opt = "):
            parts = line[len("opt = "):].split(" ")
            name = parts[0]
            net_names = parts[1].split(",")
            fields = dict(p.split("=", 1) for p in parts[2:])
            opt_specs.append((name, net_names, fields))
        elif " = " in line:
            key, value = line.split(" = ", 1)
            header[key] = value
    offset = 0

    def take(shape):
        nonlocal offset
        count = int(np.prod(shape))
        arr = np.frombuffer(
            blob, dtype="<f8", count=count, offset=offset
        ).reshape(shape)
        offset += count * 8
        return arr.astype(float)

    nets = {}
    for name, widths, acts in net_specs:
        weights = []
        biases = []
        for layer in range(len(widths) - 1):
            weights.append(take((widths[layer], widths[layer + 1])))
            biases.append(take((widths[layer + 1],)))
        nets[name] = Mlp(weights=weights, biases=biases, activations=acts)
    opts = {}
    for name, net_names, fields in opt_specs:
        shapes = []
        for net_name in net_names:
            if net_name not in nets:
                raise ValueError("optimizer %r references unknown net %r" % (name, net_name))
            shapes.extend(p.shape for p in nets[net_name].param_list())
        m = [take(s) for s in shapes]
        v = [take(s) for s in shapes]
        opts[name] = (
            net_names,
            AdamState(
                m=m,
                v=v,
                t=int(fields["t"]),
                lr=float(fields["lr"]),
                beta1=float(fields["beta1"]),
                beta2=float(fields["beta2"]),
                eps=float(fields["eps"]),
            ),
        )
    if offset != len(blob):
        raise ValueError(
            "checkpoint %s has %d trailing bytes" % (path, len(blob) - offset)
        )
    return header, nets, opts
