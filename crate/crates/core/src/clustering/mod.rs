//! Partitioning: generalized Louvain on trace Hᵀ(F − abᵀ)H, spectral
//! k-means, variation of information and multiscale scans.

pub mod kmeans;
pub mod louvain;
pub mod quality;
pub mod scan;
pub mod spectral;
pub mod vi;

pub use kmeans::{kmeans, KMeansConfig, KMeansResult};
pub use louvain::{louvain_optimize, louvain_traced, LouvainTrace};
pub use quality::{quality_score, QualityConfig};
pub use scan::{geometric_grid, scan_configs, time_scan, Plateau, ScanConfig, ScanResult};
pub use spectral::{spectral_partition, spectral_vectors, SpectralInput};
pub use vi::variation_of_information;
