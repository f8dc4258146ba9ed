//! Synthetic stand-ins for the unavailable trade data: the 10-input /
//! 10-output market-selection schema, a seeded dataset generator and a
//! 617-family HS catalog.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{CatalogEntry, Dataset, ProductCatalog, Role, VariableSpec};

/// Default number of countries in a generated market dataset.
pub const DEFAULT_COUNTRIES: usize = 233;

/// Number of product families in [`fixture_catalog`].
pub const CATALOG_SIZE: usize = 617;

/// Id of the import-quantity output used for ranking.
pub const QUANTITY_VAR: &str = "imp_qty_2018";

const TABLE: [(&str, Role, &str, &str); 20] = [
    ("dist_km", Role::Input, "Average distance of importing countries", "km"),
    ("lpi", Role::Input, "Logistics performance index", "index"),
    ("ease_business", Role::Input, "Index of ease of doing business", "index"),
    ("gdp_growth_14_18", Role::Input, "GDP growth 2014-2018", "%"),
    ("gdp_pc_2018", Role::Input, "GDP per capita in 2018", "USD"),
    ("customs_load", Role::Input, "Customs procedures load", "index"),
    ("export_lead_time", Role::Input, "Export lead time", "days"),
    ("gap_long_term", Role::Input, "Cultural gap: long-term orientation", "points"),
    ("gap_uncertainty", Role::Input, "Cultural gap: uncertainty avoidance", "points"),
    ("gap_power_distance", Role::Input, "Cultural gap: power distance", "points"),
    ("imp_value_2018", Role::Output, "Imported value in 2018", "kUSD"),
    ("trade_balance", Role::Output, "Trade balance", "kUSD"),
    (QUANTITY_VAR, Role::Output, "Quantity imported in 2018", "tons"),
    ("value_growth_14_18", Role::Output, "Annual growth in value 2014-2018", "%"),
    ("qty_growth_14_18", Role::Output, "Annual quantity growth 2014-2018", "%"),
    ("value_growth_17_18", Role::Output, "Annual growth in value 2017-2018", "%"),
    ("qty_growth_17_18", Role::Output, "Annual quantity growth 2017-2018", "%"),
    ("expected_imports_18_20", Role::Output, "Expected commodity imports 2018-2020", "kUSD"),
    ("world_export_share", Role::Output, "Share in world exports", "%"),
    ("importer_concentration", Role::Output, "Concentration of importing countries", "index"),
];

/// The ten-input, ten-output variable set used for market selection.
pub fn market_schema() -> Vec<VariableSpec> {
    TABLE
        .iter()
        .map(|&(id, role, name, units)| VariableSpec::new(id, role, name, units))
        .collect()
}

/// Synthetic country codes `C001`, `C002`, ...
pub fn country_ids(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("C{i:03}")).collect()
}

/// Generates a strictly positive dataset for `schema`.
///
/// Known market variables get plausible ranges tied to a latent market size
/// per country; any other variable is drawn uniformly from `[1, 100)`. The
/// stream is ChaCha8, so the same seed gives the same values on every
/// platform.
pub fn generate_fixture(seed: u64, n_countries: usize, schema: &[VariableSpec]) -> Dataset {
    assert!(n_countries >= 1, "need at least one country");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(n_countries);
    for _ in 0..n_countries {
        let size = (rng.gen_range(0.0f64..6.0)).exp();
        let value = size * rng.gen_range(500.0..1500.0);
        let mut row = Vec::with_capacity(schema.len());
        for spec in schema {
            let v = match spec.id.as_str() {
                "dist_km" => rng.gen_range(300.0..19_000.0),
                "lpi" => rng.gen_range(1.8..4.2),
                "ease_business" => rng.gen_range(20.0..90.0),
                "gdp_growth_14_18" => rng.gen_range(0.2..9.0),
                "gdp_pc_2018" => rng.gen_range(6.0f64..11.5).exp(),
                "customs_load" => rng.gen_range(1.0..6.0),
                "export_lead_time" => rng.gen_range(1.0..60.0),
                "gap_long_term" | "gap_uncertainty" | "gap_power_distance" => rng.gen_range(1.0..80.0),
                "imp_value_2018" => value,
                "trade_balance" => value * rng.gen_range(0.05..2.0),
                QUANTITY_VAR => value * rng.gen_range(0.2..3.0),
                "expected_imports_18_20" => value * rng.gen_range(0.9..1.4),
                "world_export_share" => rng.gen_range(0.01..5.0),
                "importer_concentration" => rng.gen_range(0.05..1.0),
                id if id.contains("growth") => rng.gen_range(0.5..30.0),
                _ => rng.gen_range(1.0..100.0),
            };
            row.push(v);
        }
        values.push(row);
    }
    Dataset::new(country_ids(n_countries), schema.to_vec(), values).expect("generated dataset is valid")
}

/// Seed for one product's fixture, derived from a batch seed and HS code.
pub fn product_seed(seed: u64, code: &str) -> u64 {
    let code: u64 = code.parse().unwrap_or(0);
    // splitmix64 finalizer over the combined value
    let mut z = seed ^ code.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// HS section (1–21) containing a chapter (1–97).
pub fn hs_section(chapter: u8) -> u8 {
    match chapter {
        1..=5 => 1,
        6..=14 => 2,
        15 => 3,
        16..=24 => 4,
        25..=27 => 5,
        28..=38 => 6,
        39..=40 => 7,
        41..=43 => 8,
        44..=46 => 9,
        47..=49 => 10,
        50..=63 => 11,
        64..=67 => 12,
        68..=70 => 13,
        71 => 14,
        72..=83 => 15,
        84..=85 => 16,
        86..=89 => 17,
        90..=92 => 18,
        93 => 19,
        94..=96 => 20,
        97 => 21,
        _ => panic!("chapter {chapter} outside 1..=97"),
    }
}

/// A 617-entry catalog spread over all 97 chapters and 21 sections.
///
/// Every chapter gets six families; the first 35 chapters get a seventh.
pub fn fixture_catalog() -> ProductCatalog {
    let mut entries = Vec::with_capacity(CATALOG_SIZE);
    for chapter in 1u8..=97 {
        let count = if chapter <= 35 { 7 } else { 6 };
        for h in 1..=count {
            let code = format!("{chapter:02}{h:02}00");
            entries.push(CatalogEntry {
                name: format!("Product family {chapter:02}.{h:02}"),
                code,
                section: hs_section(chapter),
                chapter,
            });
        }
    }
    ProductCatalog::new(entries).expect("fixture catalog is valid")
}
