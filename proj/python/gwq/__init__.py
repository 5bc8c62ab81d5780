"""Weyl quantization on groupoid models.

Thin wrapper over the compiled extension: model catalog, defect evaluation,
norm scans and the experiment runner.
"""

try:
    from ._gwq import (
        __version__,
        crosscheck,
        defects,
        example_info,
        list_examples,
        norm_scan,
        order_fit,
        run_experiment,
    )
except ImportError:  # build-tree layout: extension on sys.path, not in the package
    from _gwq import (
        __version__,
        crosscheck,
        defects,
        example_info,
        list_examples,
        norm_scan,
        order_fit,
        run_experiment,
    )

__all__ = [
    "__version__",
    "crosscheck",
    "defects",
    "example_info",
    "list_examples",
    "norm_scan",
    "order_fit",
    "run_experiment",
]
