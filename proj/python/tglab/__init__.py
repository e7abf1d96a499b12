"""Tilted graph states grown by double heralding."""

try:
    from ._tglab import (
        LeakageProfile,
        TglabError,
        TiltedGraph,
        command_names,
        compare_strategies,
        expected_f,
        expected_f_quadrature,
        expected_f_sq,
        failure_function,
        fidelity_histogram,
        overlap_integral,
        p_success,
        run_command,
        series_integrals,
        success_probability,
        verify,
    )
except ImportError:  # in-tree build: the extension sits next to the package
    from _tglab import (
        LeakageProfile,
        TglabError,
        TiltedGraph,
        command_names,
        compare_strategies,
        expected_f,
        expected_f_quadrature,
        expected_f_sq,
        failure_function,
        fidelity_histogram,
        overlap_integral,
        p_success,
        run_command,
        series_integrals,
        success_probability,
        verify,
    )

__version__ = "0.1.0"
