use std::collections::HashSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    pub code: String,
    pub full_name: String,
    pub source: String,
}

/// The set of indicator codes a dataset may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    entries: Vec<CatalogEntry>,
}

const REFERENCE: [(&str, &str, &str); 30] = [
    ("UNITEDSTACONJOBCLA", "Continuing Jobless Claims", "U.S. Department of Labor via FRED"),
    ("USAPFBC", "Philly Fed Business Conditions", "Federal Reserve Bank of Philadelphia"),
    ("UNITEDSTAPHIFEDMANIN", "Philadelphia Fed Manufacturing Index", "Federal Reserve Bank of Philadelphia"),
    ("UNITEDSTAGRONATPRO", "Gross National Product", "U.S. Bureau of Economic Analysis via FRED"),
    ("USANYGDPCCAPPPCD", "GDP per Capita, PPP", "World Bank"),
    ("UnitedStaYouUneRat", "Youth Unemployment Rate – United States", "U.S. Bureau of Labor Statistics"),
    ("UNITEDSTAGDPFROTRA", "GDP from Transportation", "U.S. Bureau of Economic Analysis (BEA)"),
    ("UNITEDSTANEWORD", "New Orders for Durable Goods", "U.S. Census Bureau"),
    ("UNITEDSTAECOOPTIND", "Economic Optimism Index", "IBD/TIPP"),
    ("USADBT", "Debt Balance Total", "U.S. Department of the Treasury"),
    ("USCABAL", "Current Account Balance", "U.S. Bureau of Economic Analysis"),
    ("USHOSP", "Hospital Services Expenditures", "American Hospital Association"),
    ("USACA2GDP", "Current Account to GDP Ratio", "World Bank"),
    ("USACPPY", "Core Producer Prices YoY", "U.S. Bureau of Labor Statistics (BLS)"),
    ("UNITEDSTACHU", "CPI Housing & Utilities", "U.S. Bureau of Labor Statistics (BLS)"),
    ("UNITEDSTAGFPA", "GDP from Public Administration", "U.S. Bureau of Economic Analysis (BEA)"),
    ("UNITEDSTAPARTIMEMP", "Part-Time Employment", "U.S. Bureau of Labor Statistics"),
    ("USARENINF", "Rental Inflation Rate", "U.S. Bureau of Labor Statistics"),
    ("USAMCEC", "Michigan Current Economic Conditions", "University of Michigan"),
    ("UNITEDSTACASSHIHOMPR", "Case-Shiller Home Price Index", "S&P Dow Jones Indices"),
    ("USAECIB", "Employment Cost Index", "U.S. Bureau of Labor Statistics (BLS)"),
    ("GDPCQOQ", "GDP Growth Rate", "U.S. Bureau of Economic Analysis"),
    ("UnitedStRetAgeWom", "Retirement Age for Women", "OECD"),
    ("USBEDS", "Hospital Beds per 1,000 People", "World Bank"),
    ("UNITEDSTACORPCEPRIIN", "Core PCE Price Index", "U.S. Bureau of Economic Analysis (BEA)"),
    ("UNITEDSTAGDPDEF", "GDP Deflator", "U.S. Bureau of Economic Analysis"),
    ("UNITEDSTAPROPRICHA", "Producer Prices Change", "U.S. Bureau of Labor Statistics"),
    ("UNITEDSTAJC4A", "4-Week Average Jobless Claims", "U.S. Department of Labor via FRED"),
    ("USPRR", "Price-to-Rent Ratio", "Global Property Guide"),
    ("UNITEDSTACPITRA", "CPI Transportation", "U.S. Bureau of Labor Statistics (BLS)"),
];

impl FeatureCatalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.code.trim().is_empty() {
                return Err(Error::config("catalog code must be non-empty"));
            }
            if !seen.insert(e.code.as_str()) {
                return Err(Error::config(format!("duplicate catalog code `{}`", e.code)));
            }
        }
        Ok(Self { entries })
    }

    /// The 30 monthly indicators of the reference panel.
    pub fn reference() -> Self {
        let entries = REFERENCE
            .iter()
            .map(|&(code, full_name, source)| CatalogEntry {
                code: code.to_owned(),
                full_name: full_name.to_owned(),
                source: source.to_owned(),
            })
            .collect();
        Self { entries }
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.entries.iter().any(|e| e.code == code)
    }

    pub fn get(&self, code: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.code == code)
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.code.as_str())
    }
}
