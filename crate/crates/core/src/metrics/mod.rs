//! Flow matrices, net migration rates and citation metrics.

pub mod citations;
pub mod flows;
pub mod nmr;

pub use citations::{
    academic_age, annual_citation_rate, citation_groups, citation_profiles,
    discipline_normalized_rate, quantile_linear, total_citations, CitationGroup, CitationProfile,
    CitationSummary, Tertiles,
};
pub use flows::{aggregate_flows, FlowMatrix};
pub use nmr::{
    net_migration_rate, nmr_series, population_by_year, reported_window,
    research_active_population, NmrConfig, NmrRow, NmrSeries,
};
