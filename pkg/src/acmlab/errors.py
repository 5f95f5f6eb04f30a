"""Exception hierarchy shared by every acmlab module.

Each error carries the process exit code the CLI reports for it:
2 for configuration problems, 3 for data problems, 4 for numerical failures.
"""


class AcmLabError(Exception):
    """Base class for all acmlab errors."""

    exit_code = 1


# --- configuration -----------------------------------------------------------

class ConfigError(AcmLabError, ValueError):
    exit_code = 2


class LambdaOutOfRange(ConfigError):
    def __init__(self, lam):
        super().__init__(f"lambda must lie in (0, 1], got {lam!r}")
        self.lam = lam


class AttentionNotStatic(ConfigError):
    def __init__(self):
        super().__init__(
            "attention operators depend on the current embedding; "
            "build them per forward pass instead of with make_aggregator"
        )


class UnknownOp(ConfigError):
    def __init__(self, op_kind):
        super().__init__(f"unknown op kind {op_kind!r}")
        self.op_kind = op_kind


# --- data ---------------------------------------------------------------------

class DataError(AcmLabError, ValueError):
    exit_code = 3


class MissingFile(DataError):
    def __init__(self, path):
        super().__init__(f"missing file: {path}")
        self.path = path


class ParseError(DataError):
    def __init__(self, path, line, detail=""):
        msg = f"{path}:{line}: cannot parse"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.path = path
        self.line = line


class ShapeMismatch(DataError):
    pass


class SplitOverlap(DataError):
    def __init__(self, nodes):
        nodes = sorted(int(n) for n in nodes)
        super().__init__(f"nodes appear in more than one split: {nodes[:10]}")
        self.nodes = nodes


class LabelOutOfRange(DataError):
    pass


class InvalidProbability(DataError):
    pass


class IndivisibleBlocks(DataError):
    pass


class IndexOutOfRange(DataError):
    pass


class DuplicateEdge(DataError):
    def __init__(self, u, v):
        super().__init__(f"edge ({u}, {v}) listed more than once")
        self.edge = (u, v)


class SelfLoopInInput(DataError):
    def __init__(self, u):
        super().__init__(f"self-loop on node {u}; self-loops are added by the operators")
        self.node = u


class GraphNotConnected(DataError):
    def __init__(self, n_components):
        super().__init__(f"graph has {n_components} connected components")
        self.n_components = n_components


# --- numerics -----------------------------------------------------------------

class NumericalError(AcmLabError, ArithmeticError):
    exit_code = 4


class NearZeroVector(NumericalError):
    def __init__(self, rows=None):
        detail = "" if rows is None else f" at rows {list(rows)[:10]}"
        super().__init__("vector too close to the origin to project" + detail)
        self.rows = rows


class AtProjectionCenter(NumericalError):
    def __init__(self, rows=None):
        detail = "" if rows is None else f" at rows {list(rows)[:10]}"
        super().__init__("point coincides with the projection center x0" + detail)
        self.rows = rows


class NotOnManifold(NumericalError):
    def __init__(self, deviation):
        super().__init__(f"point is off the manifold by {deviation:.3e}")
        self.deviation = deviation


class NonScalarLoss(NumericalError):
    def __init__(self, shape):
        super().__init__(f"backward needs a 1x1 loss, got shape {shape}")
        self.shape = shape


class NonFiniteLoss(NumericalError):
    def __init__(self, epoch, value):
        super().__init__(f"loss became {value} at epoch {epoch}")
        self.epoch = epoch
        self.value = value
