"""ACM Lab - aggregation over compact manifolds for graph neural networks."""

__version__ = "0.1.0"
