//! Numerical protocols: random local-operator ensembles, binned matrix
//! element statistics, band detection and the figure datasets.

pub mod bands;
pub mod binning;
pub mod ensemble;
pub mod figures;

pub use bands::{detect_bands, gap_omegas, BandPeak, BandReport};
pub use binning::{
    bin_offdiagonal, ensemble_statistics, Bin, BinAccumulator, BinnedStatistics, BinningParams,
    EnsembleStatistics, WindowDiagonal,
};
pub use ensemble::{
    local_eigenbasis_elements, matrix_elements_total_basis, sample_local_operator,
    OperatorEnsembleSpec, SpectrumLaw,
};
pub use figures::{
    coefficient_table, diagonal_comparison, quantile_indices, run_figure, DiagonalComparison, Experiment, FigureOutput, REFERENCE_RANGE,
};
