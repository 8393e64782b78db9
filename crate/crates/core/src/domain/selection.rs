use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use super::registry::{CommunityId, CommunityRegistry, RegionId, UrbanicityLabel};
use super::DomainError;

/// One of the three survey waves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SurveyYear(u16);

pub const SURVEY_YEARS: [SurveyYear; 3] = [SurveyYear(2008), SurveyYear(2009), SurveyYear(2010)];

impl SurveyYear {
    pub fn new(year: u16) -> Result<Self, DomainError> {
        if (2008..=2010).contains(&year) {
            Ok(SurveyYear(year))
        } else {
            Err(DomainError::UnknownYear(year.to_string()))
        }
    }

    pub fn get(self) -> u16 {
        self.0
    }

    /// Dense index 0..3.
    pub fn index(self) -> usize {
        usize::from(self.0 - 2008)
    }
}

impl fmt::Display for SurveyYear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for SurveyYear {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u16(self.0)
    }
}

impl FromStr for SurveyYear {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        // Some exports store the wave as "2008.0".
        let t = t.strip_suffix(".0").unwrap_or(t);
        t.parse::<u16>()
            .map_err(|_| DomainError::UnknownYear(s.to_string()))
            .and_then(SurveyYear::new)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum YearFilter {
    Single(SurveyYear),
    #[default]
    AllYears,
}

impl YearFilter {
    pub fn includes(self, year: SurveyYear) -> bool {
        match self {
            YearFilter::Single(y) => y == year,
            YearFilter::AllYears => true,
        }
    }

    /// Dense year indices covered by the filter.
    pub fn year_indices(self) -> std::ops::Range<usize> {
        match self {
            YearFilter::Single(y) => y.index()..y.index() + 1,
            YearFilter::AllYears => 0..SURVEY_YEARS.len(),
        }
    }
}

impl fmt::Display for YearFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YearFilter::Single(y) => write!(f, "{y}"),
            YearFilter::AllYears => f.write_str("all"),
        }
    }
}

impl Serialize for YearFilter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for YearFilter {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            Ok(YearFilter::AllYears)
        } else {
            s.parse().map(YearFilter::Single)
        }
    }
}

/// Scope of an aggregation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SelectionLevel {
    Community(CommunityId),
    Urbanicity(UrbanicityLabel),
    Region(RegionId),
    All,
}

impl SelectionLevel {
    pub fn kind(&self) -> &'static str {
        match self {
            SelectionLevel::Community(_) => "community",
            SelectionLevel::Urbanicity(_) => "urbanicity",
            SelectionLevel::Region(_) => "region",
            SelectionLevel::All => "all",
        }
    }

    /// Parse the `level` + `id` pair used by query strings.
    pub fn parse(level: &str, id: Option<&str>) -> Result<Self, DomainError> {
        let need_id = || {
            id.filter(|s| !s.is_empty())
                .ok_or_else(|| DomainError::MissingSelectionId(level.to_string()))
        };
        match level.trim().to_ascii_lowercase().as_str() {
            "community" => Ok(SelectionLevel::Community(CommunityId::new(need_id()?)?)),
            "urbanicity" => Ok(SelectionLevel::Urbanicity(
                UrbanicityLabel::new(need_id()?)?,
            )),
            "region" => Ok(SelectionLevel::Region(need_id()?.parse()?)),
            "all" => Ok(SelectionLevel::All),
            other => Err(DomainError::UnknownLevel(other.to_string())),
        }
    }
}

impl Serialize for SelectionLevel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SelectionLevel", 2)?;
        st.serialize_field("level", self.kind())?;
        match self {
            SelectionLevel::Community(id) => st.serialize_field("id", id.as_str())?,
            SelectionLevel::Urbanicity(u) => st.serialize_field("id", u.as_str())?,
            SelectionLevel::Region(r) => st.serialize_field("id", r.as_str())?,
            SelectionLevel::All => st.serialize_field("id", &None::<&str>)?,
        }
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selection {
    pub level: SelectionLevel,
    pub years: YearFilter,
}

impl Selection {
    pub fn new(level: SelectionLevel, years: YearFilter) -> Self {
        Selection { level, years }
    }

    pub fn all(years: YearFilter) -> Self {
        Selection::new(SelectionLevel::All, years)
    }

    pub fn community(id: &str, years: YearFilter) -> Result<Self, DomainError> {
        Ok(Selection::new(
            SelectionLevel::Community(CommunityId::new(id)?),
            years,
        ))
    }

    pub fn region(region: RegionId, years: YearFilter) -> Self {
        Selection::new(SelectionLevel::Region(region), years)
    }

    pub fn urbanicity(label: &str, years: YearFilter) -> Result<Self, DomainError> {
        Ok(Selection::new(
            SelectionLevel::Urbanicity(UrbanicityLabel::new(label)?),
            years,
        ))
    }
}

impl CommunityRegistry {
    /// Registry indices covered by a selection level, ascending.
    pub fn resolve_indices(&self, level: &SelectionLevel) -> Result<Vec<usize>, DomainError> {
        let all = self.communities().iter().enumerate();
        let picked: Vec<usize> = match level {
            SelectionLevel::Community(id) => {
                return self
                    .index_of(id.as_str())
                    .map(|i| vec![i])
                    .ok_or_else(|| DomainError::UnknownCommunity(id.to_string()));
            }
            SelectionLevel::Urbanicity(label) => all
                .filter(|(_, c)| &c.urbanicity == label)
                .map(|(i, _)| i)
                .collect(),
            SelectionLevel::Region(region) => all
                .filter(|(_, c)| c.region == *region)
                .map(|(i, _)| i)
                .collect(),
            SelectionLevel::All => (0..self.len()).collect(),
        };
        if picked.is_empty() {
            return Err(match level {
                SelectionLevel::Urbanicity(label) => {
                    DomainError::UnknownUrbanicity(label.to_string())
                }
                SelectionLevel::Region(region) => DomainError::UnknownRegion(region.to_string()),
                _ => unreachable!("community and all levels return early or are non-empty"),
            });
        }
        Ok(picked)
    }
}

/// Community ids covered by a selection.
pub fn resolve_selection(
    sel: &Selection,
    registry: &CommunityRegistry,
) -> Result<BTreeSet<CommunityId>, DomainError> {
    Ok(registry
        .resolve_indices(&sel.level)?
        .into_iter()
        .map(|i| registry.get(i).id.clone())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(set: &BTreeSet<CommunityId>) -> Vec<&str> {
        set.iter().map(|c| c.as_str()).collect()
    }

    #[test]
    fn all_resolves_to_every_community() {
        let reg = CommunityRegistry::default_registry();
        let set = resolve_selection(&Selection::all(YearFilter::AllYears), &reg).unwrap();
        assert_eq!(set.len(), 26);
    }

    #[test]
    fn community_is_singleton() {
        let reg = CommunityRegistry::default_registry();
        let set = resolve_selection(
            &Selection::community("detroit-mi", YearFilter::AllYears).unwrap(),
            &reg,
        )
        .unwrap();
        assert_eq!(ids(&set), vec!["detroit-mi"]);
    }

    #[test]
    fn rust_belt_members() {
        let reg = CommunityRegistry::default_registry();
        let set = resolve_selection(
            &Selection::region(RegionId::RustBelt, YearFilter::AllYears),
            &reg,
        )
        .unwrap();
        assert_eq!(
            ids(&set),
            vec![
                "akron-oh",
                "detroit-mi",
                "fort-wayne-in",
                "gary-in",
                "lexington-ky",
                "philadelphia-pa",
                "state-college-pa"
            ]
        );
    }

    #[test]
    fn regions_partition_registry() {
        let reg = CommunityRegistry::default_registry();
        let mut union = BTreeSet::new();
        let mut total = 0;
        for r in RegionId::ALL {
            let set = resolve_selection(&Selection::region(r, YearFilter::AllYears), &reg).unwrap();
            total += set.len();
            union.extend(set);
        }
        assert_eq!(total, 26);
        assert_eq!(
            union,
            resolve_selection(&Selection::all(YearFilter::AllYears), &reg).unwrap()
        );
    }

    #[test]
    fn each_community_in_its_own_groups() {
        let reg = CommunityRegistry::default_registry();
        for c in reg.communities() {
            let by_u = reg
                .resolve_indices(&SelectionLevel::Urbanicity(c.urbanicity.clone()))
                .unwrap();
            let by_r = reg
                .resolve_indices(&SelectionLevel::Region(c.region))
                .unwrap();
            let i = reg.index_of(c.id.as_str()).unwrap();
            assert!(by_u.contains(&i) && by_r.contains(&i));
        }
    }

    #[test]
    fn unknown_payloads() {
        let reg = CommunityRegistry::default_registry();
        let err = resolve_selection(
            &Selection::community("atlantis-xx", YearFilter::AllYears).unwrap(),
            &reg,
        );
        assert!(matches!(err, Err(DomainError::UnknownCommunity(_))));
        let err = resolve_selection(
            &Selection::urbanicity("Lunar colony", YearFilter::AllYears).unwrap(),
            &reg,
        );
        assert!(matches!(err, Err(DomainError::UnknownUrbanicity(_))));
    }

    #[test]
    fn year_filters() {
        assert_eq!("all".parse::<YearFilter>().unwrap(), YearFilter::AllYears);
        assert_eq!("2009".parse::<YearFilter>().unwrap().to_string(), "2009");
        assert!("2011".parse::<YearFilter>().is_err());
        assert!("20x9".parse::<YearFilter>().is_err());
        assert_eq!(YearFilter::AllYears.year_indices(), 0..3);
        assert_eq!(
            YearFilter::Single(SurveyYear::new(2010).unwrap()).year_indices(),
            2..3
        );
        assert_eq!("2008.0".parse::<SurveyYear>().unwrap().get(), 2008);
    }

    #[test]
    fn level_parsing() {
        assert_eq!(
            SelectionLevel::parse("all", None).unwrap(),
            SelectionLevel::All
        );
        assert_eq!(
            SelectionLevel::parse("region", Some("rust_belt")).unwrap(),
            SelectionLevel::Region(RegionId::RustBelt)
        );
        assert!(matches!(
            SelectionLevel::parse("region", None),
            Err(DomainError::MissingSelectionId(_))
        ));
        assert!(matches!(
            SelectionLevel::parse("state", Some("x")),
            Err(DomainError::UnknownLevel(_))
        ));
    }
}
