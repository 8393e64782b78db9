use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DomainError;

/// Geographic grouping of communities. Assignments are configuration, see
/// [`CommunityRegistry`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionId {
    GreatPlains,
    West,
    DeepSouth,
    Southeast,
    RustBelt,
}

impl RegionId {
    pub const ALL: [RegionId; 5] = [
        RegionId::GreatPlains,
        RegionId::West,
        RegionId::DeepSouth,
        RegionId::Southeast,
        RegionId::RustBelt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionId::GreatPlains => "great_plains",
            RegionId::West => "west",
            RegionId::DeepSouth => "deep_south",
            RegionId::Southeast => "southeast",
            RegionId::RustBelt => "rust_belt",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            RegionId::GreatPlains => "Great Plains",
            RegionId::West => "West",
            RegionId::DeepSouth => "Deep South",
            RegionId::Southeast => "Southeast",
            RegionId::RustBelt => "Rust Belt",
        }
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionId {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        RegionId::ALL
            .into_iter()
            .find(|r| r.as_str() == key)
            .ok_or_else(|| DomainError::UnknownRegion(s.to_string()))
    }
}

/// Stable URL-safe community key, e.g. `st-paul-mn`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommunityId(String);

impl CommunityId {
    pub fn new(id: impl Into<String>) -> Result<Self, DomainError> {
        let id = id.into();
        let valid = !id.is_empty()
            && !id.starts_with('-')
            && !id.ends_with('-')
            && id
                .bytes()
                .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-');
        if valid {
            Ok(CommunityId(id))
        } else {
            Err(DomainError::InvalidSlug(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CommunityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Lowercase slug of a display name: "St. Paul, MN" -> "st-paul-mn".
pub fn slugify(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

/// Census urbanicity designation, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UrbanicityLabel(String);

impl UrbanicityLabel {
    pub fn new(label: impl Into<String>) -> Result<Self, DomainError> {
        let label = label.into();
        if label.trim().is_empty() {
            Err(DomainError::EmptyUrbanicity)
        } else {
            Ok(UrbanicityLabel(label))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for UrbanicityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Community {
    pub id: CommunityId,
    pub display_name: String,
    pub region: RegionId,
    pub urbanicity: UrbanicityLabel,
    pub latitude: f64,
    pub longitude: f64,
    /// Region assignment is not stated by the source and was inferred from proximity.
    pub inferred: bool,
}

/// Continental United States, generously padded.
pub const CONUS_LATITUDE: (f64, f64) = (24.0, 50.0);
pub const CONUS_LONGITUDE: (f64, f64) = (-125.5, -66.0);

pub const COMMUNITY_COUNT: usize = 26;

const DEFAULT_REGISTRY: &str = include_str!("../../data/registry.csv");

#[derive(Debug, Deserialize)]
struct RegistryRow {
    id: String,
    display_name: String,
    region: String,
    urbanicity: String,
    latitude: f64,
    longitude: f64,
    inferred: bool,
}

/// The fixed set of surveyed communities, in file order.
///
/// Indices into [`CommunityRegistry::communities`] are used as dense keys by
/// the analytics snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct CommunityRegistry {
    communities: Vec<Community>,
}

impl CommunityRegistry {
    /// The registry shipped with the crate.
    pub fn default_registry() -> Self {
        Self::from_reader(DEFAULT_REGISTRY.as_bytes()).expect("bundled registry is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, DomainError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| DomainError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, DomainError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut communities = Vec::new();
        for (i, row) in rdr.deserialize::<RegistryRow>().enumerate() {
            let row = row.map_err(|e| DomainError::RegistryRow {
                line: i + 2,
                message: e.to_string(),
            })?;
            let id = CommunityId::new(row.id)?;
            let region = row.region.parse()?;
            let urbanicity = UrbanicityLabel::new(row.urbanicity)?;
            communities.push(Community {
                id,
                display_name: row.display_name,
                region,
                urbanicity,
                latitude: row.latitude,
                longitude: row.longitude,
                inferred: row.inferred,
            });
        }
        Self::new(communities)
    }

    pub fn new(communities: Vec<Community>) -> Result<Self, DomainError> {
        if communities.len() != COMMUNITY_COUNT {
            return Err(DomainError::CommunityCount(communities.len()));
        }
        let mut seen = BTreeSet::new();
        for c in &communities {
            if !seen.insert(c.id.clone()) {
                return Err(DomainError::DuplicateCommunity(c.id.to_string()));
            }
            let lat_ok = (CONUS_LATITUDE.0..=CONUS_LATITUDE.1).contains(&c.latitude);
            let lon_ok = (CONUS_LONGITUDE.0..=CONUS_LONGITUDE.1).contains(&c.longitude);
            if !lat_ok || !lon_ok {
                return Err(DomainError::Coordinates {
                    id: c.id.to_string(),
                    latitude: c.latitude,
                    longitude: c.longitude,
                });
            }
        }
        Ok(CommunityRegistry { communities })
    }

    pub fn communities(&self) -> &[Community] {
        &self.communities
    }

    pub fn len(&self) -> usize {
        self.communities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.communities.is_empty()
    }

    pub fn get(&self, index: usize) -> &Community {
        &self.communities[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.communities.iter().position(|c| c.id.as_str() == id)
    }

    pub fn find(&self, id: &str) -> Option<&Community> {
        self.index_of(id).map(|i| &self.communities[i])
    }

    /// Matches a raw dataset value against ids, display names and slugs of
    /// display names, case-insensitively.
    pub fn lookup_loose(&self, raw: &str) -> Option<usize> {
        let raw = raw.trim();
        if let Some(i) = self.index_of(raw) {
            return Some(i);
        }
        let slug = slugify(raw);
        self.communities
            .iter()
            .position(|c| c.display_name.eq_ignore_ascii_case(raw) || c.id.as_str() == slug)
    }

    /// Distinct urbanicity labels, sorted.
    pub fn urbanicity_labels(&self) -> Vec<&UrbanicityLabel> {
        let set: BTreeSet<&UrbanicityLabel> =
            self.communities.iter().map(|c| &c.urbanicity).collect();
        set.into_iter().collect()
    }

    /// Replace urbanicity labels with ones discovered in the data.
    pub fn with_urbanicity(mut self, index: usize, label: UrbanicityLabel) -> Self {
        self.communities[index].urbanicity = label;
        self
    }
}
