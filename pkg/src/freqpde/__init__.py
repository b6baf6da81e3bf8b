"""freqpde: PDE discovery from noisy gridded data.

Candidate-term systems are assembled from low-frequency DFT modes of each
evaluated library term, and active terms are selected by the Candidate
Support Rate (leave-one-column-out solution change).
"""

from .field import Field, FieldStats, field_stats, read_field, trim_interior, write_field
from .deriv import DiffConfig, differentiate
from .candlib import LibrarySpec, TermDescriptor, evaluate_library, standard_library
from .freqsys import (
    CutoffSpec,
    FreqSystem,
    RealSystem,
    assemble_freq_system,
    assemble_timespace_system,
    dft_nd,
    lowpass_filter,
    spectral_error_profile,
)
from .ident import (
    Coefficients,
    IdentResult,
    PipelineConfig,
    SelectionPolicy,
    SupportRates,
    csr_identify,
    fit_selected,
    identify,
    lstsq,
    select_terms,
    st_ridge,
    stlm,
    support_rates,
)
from .synth import (
    DEFAULT_GRIDS,
    EQUATIONS,
    EquationSpec,
    GridSpec,
    NoiseSpec,
    inject_noise,
    solve_reference,
)
from .bench import (
    alpha_sweep,
    compare_methods,
    csr_vs_stlm,
    mean_relative_error,
    structure_correct,
)

__version__ = "0.1.0"
