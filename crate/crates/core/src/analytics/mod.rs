//! Measured and predicted quantities of bipartite graphs.

pub mod clustering;
pub mod degree;
pub mod fit;
pub mod theory;

pub use clustering::{
    blcc, blcc_report, blcc_sum, blcc_with, neighborhood_report, neighborhood_sum, second_neighbor_count,
    second_neighbor_stats, similarity_neighborhood, similarity_neighborhood_with, BlccReport, BlccSum,
    Neighborhood, NeighborhoodReport, NeighborhoodSum, Scratch, SecondNeighborStats,
};
pub use degree::{degree_histogram, neighbor_expected_degree, DegreeHistogram};
pub use fit::{ccdf_points, fit_distribution_shape, least_squares, LineFit, ShapeFit};
pub use theory::{
    combined_kernel, exponential_limit_pdf, exponential_limit_rate, fc_gc, power_law_exponent,
    theoretical_ccdf_for, theoretical_pdf, theoretical_pdf_for,
};
