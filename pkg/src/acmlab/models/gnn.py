"""SGC, GCN and GAT in vanilla, ACM and ACM* form, built on the autodiff tape.

Depth is counted in aggregation steps. An ACM model with N layers runs
N - 1 transform layers

    H̄ = P_U(L·H),   H = PB(tanh(PF(H̄)·W))

followed by one last aggregation H̄ = P_U(L·H) and the classifier
logits = PF(H̄)·W_out. Vanilla GCN/GAT run N layers L·H·W with relu between
them, the last one producing the logits. SGC has no hidden transforms: N
aggregations, then a single linear classifier.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import softmax

from acmlab.config.constants import CENTER_GUARD, ON_MANIFOLD_TOL, U_FLOOR
from acmlab.config.settings import Arch, ModelConfig
from acmlab.engine.autodiff import Node, Tape
from acmlab.engine.graph import (
    AggregatorKind,
    AggregatorMatrix,
    Graph,
    attention_operator,
    make_aggregator,
    spmm,
)
from acmlab.engine.manifold import (
    ManifoldSpec,
    on_manifold,
    project_pu,
    push_back,
    push_forward,
    quadratic_form,
)
from acmlab.engine.optim import derive_seed, glorot_init
from acmlab.errors import NotOnManifold, ShapeMismatch

logger = logging.getLogger(__name__)

# softplus^{-1}(1 - U_FLOOR): ACM* starts from U = I.
THETA_INIT = float(np.log(np.expm1(1.0 - U_FLOOR)))


@dataclass
class ForwardResult:
    """Output of one forward pass.

    `embeddings[k]` is the node embedding after k aggregation steps
    (k = 0 is the model input, projected for ACM models); `manifolds[k]` is the
    ManifoldSpec those rows live on, or None for vanilla models.
    """

    logits: Node
    embeddings: list = field(default_factory=list)
    manifolds: list = field(default_factory=list)


# --- stand-alone layer functions ------------------------------------------------

def _require_on(H, m):
    if not on_manifold(H, m, ON_MANIFOLD_TOL):
        dev = float(np.abs(np.atleast_1d(quadratic_form(H, m)) - 1.0).max())
        raise NotOnManifold(dev)


def gcn_acm_layer(g: Graph, H, W, m: ManifoldSpec,
                  m_out: Optional[ManifoldSpec] = None, lam: float = 1.0) -> np.ndarray:
    """One ACM-GCN layer: H̄ = P_U(L_sym·H), output PB(tanh(PF(H̄)·W)).

    Args:
        g: graph
        H: n x d embedding with rows on `m`
        W: d x d' weight
        m: manifold of the input rows
        m_out: manifold of the output rows (defaults to `m`, needs d' == d)
        lam: λ of the symmetric operator

    Raises:
        NotOnManifold: input rows are off `m`
        NearZeroVector, AtProjectionCenter: geometry guards
    """
    m_out = m if m_out is None else m_out
    H = np.asarray(H, dtype=np.float64)
    _require_on(H, m)
    L = make_aggregator(g, AggregatorKind.SYM_NORM, lam)
    h_bar = project_pu(spmm(L, H), m)
    return push_back(np.tanh(push_forward(h_bar, m) @ np.asarray(W)), m_out)


def gcn_acm_layer_tape(tape: Tape, matrix, H: Node, W: Node, u_in: Node, u_out: Node,
                       b: float = 0.0, dropout_p: float = 0.0, seed: int = 0,
                       train: bool = False) -> Node:
    """Tape version of the ACM-GCN layer (fixed sparse operator)."""
    h_bar = tape.row_project_pu(tape.spmm_const(matrix, H), u_in)
    z = tape.row_push_forward(h_bar, u_in, b=b, clamp=True)
    z = tape.dropout(z, dropout_p, seed, train)
    return tape.row_push_back(tape.tanh(tape.matmul(z, W)), u_out, clamp=True)


def _attention_nodes(tape, H, W_att, a_src, a_dst, pattern, alpha):
    indptr, cols, rows = pattern
    z = tape.matmul(H, W_att)
    src = tape.matmul(z, a_src)
    dst = tape.matmul(z, a_dst)
    return tape.attention_weights(src, dst, indptr, cols, rows, alpha=alpha)


def _pattern(g: Graph):
    a_tilde = g.augmented_adjacency()
    rows = np.repeat(np.arange(g.n_nodes), np.diff(a_tilde.indptr))
    return a_tilde.indptr.copy(), a_tilde.indices.copy(), rows


def gat_attention(g: Graph, H, W_att, a, alpha: float = 0.2) -> AggregatorMatrix:
    """Single-head GAT attention operator for embedding H.

    e_ij = leaky_relu(a · [H_i W_att ‖ H_j W_att]) for j in Ñ(u_i), then a
    softmax over each closed neighborhood.

    Args:
        g: graph
        H: n x d embedding
        W_att: d x d attention projection
        a: attention vector of length 2d

    Raises:
        ShapeMismatch: inconsistent shapes
    """
    H = np.atleast_2d(np.asarray(H, dtype=np.float64))
    W_att = np.asarray(W_att, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64).ravel()
    d = H.shape[1]
    if H.shape[0] != g.n_nodes:
        raise ShapeMismatch(f"H has {H.shape[0]} rows, graph has {g.n_nodes} nodes")
    if W_att.shape != (d, d) or a.shape != (2 * d,):
        raise ShapeMismatch(f"attention params {W_att.shape}, {a.shape} do not match d={d}")
    tape = Tape()
    weights = _attention_nodes(
        tape,
        tape.constant(H),
        tape.constant(W_att),
        tape.constant(a[:d, None]),
        tape.constant(a[d:, None]),
        _pattern(g),
        alpha,
    )
    return attention_operator(g, weights.value[:, 0])


def classify(H_final, W_out, m: Optional[ManifoldSpec] = None):
    """Softmax class probabilities and predicted labels.

    ACM models read the hyperplane chart PF(H)·W_out; vanilla models H·W_out.
    Ties go to the lowest class index.

    Returns:
        (probabilities n x C, labels of length n)
    """
    H = np.atleast_2d(np.asarray(H_final, dtype=np.float64))
    feats = H if m is None else push_forward(H, m)
    W_out = np.asarray(W_out, dtype=np.float64)
    if feats.shape[1] != W_out.shape[0]:
        raise ShapeMismatch(f"embedding dim {feats.shape[1]} vs classifier {W_out.shape}")
    return probabilities_from_logits(feats @ W_out)


def probabilities_from_logits(logits):
    probs = softmax(np.asarray(logits, dtype=np.float64), axis=1)
    return probs, np.argmax(probs, axis=1)


# --- the model -------------------------------------------------------------------

class GNNModel:
    """Parameters plus forward pass for one ModelConfig on one graph."""

    def __init__(self, cfg: ModelConfig, graph: Graph, in_dim: int, n_classes: int, seed: int = 0):
        if in_dim < 1 or n_classes < 1:
            raise ShapeMismatch(f"need in_dim, n_classes >= 1, got {in_dim}, {n_classes}")
        self.cfg = cfg
        self.graph = graph
        self.in_dim = in_dim
        self.n_classes = n_classes
        self.seed = seed
        self._operator = make_aggregator(graph, AggregatorKind.SYM_NORM, cfg.lam).matrix
        self._pattern = _pattern(graph)
        self._sgc_cache = None
        self.params = self._init_params()
        logger.debug(
            "initialised %s/%s with %d layers, %d parameters",
            cfg.arch, cfg.variant, cfg.n_layers, self.parameter_count,
        )

    # --- parameters ---

    def _layer_dims(self):
        """(input dim, output dim) of every weight-carrying layer."""
        cfg, f, h = self.cfg, self.in_dim, self.cfg.hidden_dim
        if cfg.arch == Arch.SGC:
            return []
        n_hidden = cfg.n_layers - 1
        dims = [(f if l == 0 else h, h) for l in range(n_hidden)]
        if not cfg.is_acm:
            # Vanilla: the last layer maps straight to the classes.
            dims.append((f if n_hidden == 0 else h, self.n_classes))
        return dims

    def _agg_dims(self):
        """Embedding dimension entering each aggregation step."""
        cfg, f, h = self.cfg, self.in_dim, self.cfg.hidden_dim
        if cfg.arch == Arch.SGC:
            return [f] * cfg.n_layers
        return [f] + [h] * (cfg.n_layers - 1)

    def _init_params(self):
        cfg = self.cfg
        params = {}

        def glorot(name, rows, cols):
            params[name] = glorot_init(rows, cols, derive_seed(self.seed, name))

        for l, (d_in, d_out) in enumerate(self._layer_dims()):
            glorot(f"W_{l}", d_in, d_out)
        if cfg.is_acm or cfg.arch == Arch.SGC:
            out_in = self.in_dim if cfg.arch == Arch.SGC else self._agg_dims()[-1]
            glorot("W_out", out_in, self.n_classes)
        if cfg.arch == Arch.GAT:
            for l, d in enumerate(self._agg_dims()):
                glorot(f"W_att_{l}", d, d)
                glorot(f"att_src_{l}", d, 1)
                glorot(f"att_dst_{l}", d, 1)
        if cfg.acm_star:
            params["theta_in"] = np.full((1, self.in_dim), THETA_INIT)
            if cfg.arch != Arch.SGC and cfg.n_layers > 1:
                params["theta_hidden"] = np.full((1, cfg.hidden_dim), THETA_INIT)
        return params

    @property
    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def snapshot(self) -> dict:
        return {k: v.copy() for k, v in self.params.items()}

    def load(self, params: dict):
        for k, v in params.items():
            self.params[k][...] = v

    def u_diag(self, which: str = "in") -> np.ndarray:
        """Current diagonal of U for the input ("in") or hidden ("hidden") manifold."""
        dim = self.in_dim if which == "in" else self.cfg.hidden_dim
        theta = self.params.get(f"theta_{which}")
        if theta is None:
            return np.ones(dim)
        return np.logaddexp(0.0, theta[0]) + U_FLOOR

    def manifold(self, which: str = "in") -> ManifoldSpec:
        return ManifoldSpec(u_diag=self.u_diag(which), b=self.cfg.hyperplane_b)

    # --- forward ---

    def _u_node(self, tape, nodes, which, dim):
        name = f"theta_{which}"
        if name in nodes:
            return tape.softplus(nodes[name], floor=U_FLOOR)
        return tape.constant(np.ones((1, dim)))

    def _aggregate(self, tape, nodes, H, layer):
        cfg = self.cfg
        if cfg.arch != Arch.GAT:
            return tape.spmm_const(self._operator, H)
        weights = _attention_nodes(
            tape, H,
            nodes[f"W_att_{layer}"], nodes[f"att_src_{layer}"], nodes[f"att_dst_{layer}"],
            self._pattern, cfg.leaky_relu_alpha,
        )
        indptr, cols, rows = self._pattern
        return tape.spmm_values(weights, H, indptr, cols, rows)

    def forward(self, tape: Tape, X, train: bool = False, seed: int = 0) -> ForwardResult:
        """Record a full forward pass on `tape`.

        Args:
            tape: fresh tape to record on
            X: n x f node features
            train: enables dropout
            seed: dropout seed for this pass
        """
        X = np.asarray(X, dtype=np.float64)
        if X.shape != (self.graph.n_nodes, self.in_dim):
            raise ShapeMismatch(
                f"features have shape {X.shape}, expected ({self.graph.n_nodes}, {self.in_dim})"
            )
        nodes = {name: tape.parameter(name, value) for name, value in self.params.items()}
        if self.cfg.arch == Arch.SGC:
            return self._forward_sgc(tape, nodes, X, train, seed)
        if self.cfg.is_acm:
            return self._forward_acm(tape, nodes, X, train, seed)
        return self._forward_vanilla(tape, nodes, X, train, seed)

    def _propagate_sgc(self, tape, X, u_in):
        cfg = self.cfg
        if cfg.is_acm:
            H = tape.row_project_pu(tape.constant(X), u_in, fallback=True)
        else:
            H = tape.constant(X)
        embeddings = [H.value]
        for _ in range(cfg.n_layers):
            H = tape.spmm_const(self._operator, H)
            if cfg.is_acm:
                H = tape.row_project_pu(H, u_in)
            embeddings.append(H.value)
        return H, embeddings

    def _forward_sgc(self, tape, nodes, X, train, seed):
        cfg = self.cfg
        u_in = self._u_node(tape, nodes, "in", self.in_dim) if cfg.is_acm else None
        if cfg.acm_star:
            H, embeddings = self._propagate_sgc(tape, X, u_in)
        else:
            # Parameter-free propagation: compute once per feature matrix.
            if self._sgc_cache is None or not np.array_equal(self._sgc_cache[0], X):
                scratch = Tape()
                u_fixed = scratch.constant(np.ones((1, self.in_dim)))
                H, embeddings = self._propagate_sgc(scratch, X, u_fixed)
                self._sgc_cache = (X.copy(), H.value, embeddings)
            H = tape.constant(self._sgc_cache[1])
            embeddings = list(self._sgc_cache[2])

        m = self.manifold("in") if cfg.is_acm else None
        if cfg.is_acm:
            H = tape.row_push_forward(H, u_in, b=cfg.hyperplane_b, clamp=True)
        H = tape.dropout(H, cfg.dropout_p, derive_seed(seed, "dropout", "out"), train)
        logits = tape.matmul(H, nodes["W_out"])
        return ForwardResult(logits, embeddings, [m] * len(embeddings))

    def _forward_acm(self, tape, nodes, X, train, seed):
        cfg = self.cfg
        b = cfg.hyperplane_b
        u_in = self._u_node(tape, nodes, "in", self.in_dim)
        u_hidden = self._u_node(tape, nodes, "hidden", cfg.hidden_dim) if cfg.n_layers > 1 else None
        m_in = self.manifold("in")
        m_hidden = self.manifold("hidden") if cfg.n_layers > 1 else None

        H = tape.row_project_pu(tape.constant(X), u_in, fallback=True)
        embeddings, manifolds = [H.value], [m_in]
        u_cur, m_cur = u_in, m_in
        for l in range(cfg.n_layers - 1):
            h_bar = tape.row_project_pu(self._aggregate(tape, nodes, H, l), u_cur)
            embeddings.append(h_bar.value)
            manifolds.append(m_cur)
            z = tape.row_push_forward(h_bar, u_cur, b=b, clamp=True)
            z = tape.dropout(z, cfg.dropout_p, derive_seed(seed, "dropout", l), train)
            H = tape.row_push_back(tape.tanh(tape.matmul(z, nodes[f"W_{l}"])), u_hidden, clamp=True)
            u_cur, m_cur = u_hidden, m_hidden

        last = cfg.n_layers - 1
        h_bar = tape.row_project_pu(self._aggregate(tape, nodes, H, last), u_cur)
        embeddings.append(h_bar.value)
        manifolds.append(m_cur)
        z = tape.row_push_forward(h_bar, u_cur, b=b, clamp=True)
        z = tape.dropout(z, cfg.dropout_p, derive_seed(seed, "dropout", "out"), train)
        return ForwardResult(tape.matmul(z, nodes["W_out"]), embeddings, manifolds)

    def _forward_vanilla(self, tape, nodes, X, train, seed):
        cfg = self.cfg
        H = tape.constant(X)
        embeddings = [H.value]
        for l in range(cfg.n_layers):
            H = tape.dropout(H, cfg.dropout_p, derive_seed(seed, "dropout", l), train)
            # L·(H·W) == (L·H)·W; this order multiplies the sparse operator by the narrower matrix.
            H = self._aggregate_after(tape, nodes, H, l)
            if l < cfg.n_layers - 1:
                H = tape.relu(H)
            embeddings.append(H.value)
        return ForwardResult(H, embeddings, [None] * len(embeddings))

    def _aggregate_after(self, tape, nodes, H, layer):
        if self.cfg.arch == Arch.GAT:
            # Attention scores come from the layer input, before the transform.
            indptr, cols, rows = self._pattern
            weights = _attention_nodes(
                tape, H,
                nodes[f"W_att_{layer}"], nodes[f"att_src_{layer}"], nodes[f"att_dst_{layer}"],
                self._pattern, self.cfg.leaky_relu_alpha,
            )
            return tape.spmm_values(weights, tape.matmul(H, nodes[f"W_{layer}"]), indptr, cols, rows)
        return tape.spmm_const(self._operator, tape.matmul(H, nodes[f"W_{layer}"]))

    # --- inference ---

    def predict(self, X):
        """(probabilities, labels) with dropout off."""
        result = self.forward(Tape(), X, train=False)
        return probabilities_from_logits(result.logits.value)

    def embed(self, X) -> ForwardResult:
        return self.forward(Tape(), X, train=False)


def sgc_forward(g: Graph, X, cfg: ModelConfig, params: dict) -> np.ndarray:
    """Logits of an SGC model (vanilla, ACM or ACM*) with the given parameters."""
    if cfg.arch != Arch.SGC:
        raise ShapeMismatch(f"sgc_forward needs arch=sgc, got {cfg.arch}")
    X = np.asarray(X, dtype=np.float64)
    n_classes = np.asarray(params["W_out"]).shape[1]
    model = GNNModel(cfg, g, X.shape[1], n_classes)
    model.load(params)
    return model.forward(Tape(), X).logits.value
