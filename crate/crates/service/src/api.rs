//! HTTP routes. Every handler is a pure read of the shared snapshot.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{OriginalUri, Query, State};
use axum::http::{HeaderValue, Method};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

use attache_core::analytics::{
    BarChart, Bin2d, CommunitySeries, CorrelationProfile, Density, MapPoint, ParallelCoordinates,
    Ranking,
};
use attache_core::domain::{Community, CommunityId, MetricId};
use attache_core::ingestion::Provenance;
use attache_core::{AnalyticsSnapshot, Selection, SelectionLevel, YearFilter};

use crate::error::ApiError;

pub const DEFAULT_BINS: usize = 10;
pub const DEFAULT_DENSITY_POINTS: usize = 256;

#[derive(Debug, Clone, Serialize)]
pub struct BuildInfo {
    pub name: &'static str,
    pub version: &'static str,
    pub parallel: bool,
}

impl BuildInfo {
    pub fn current(snapshot: &AnalyticsSnapshot) -> Self {
        BuildInfo {
            name: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            parallel: snapshot.execution().is_parallel(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Health {
    pub status: &'static str,
    pub rows: usize,
    pub provenance: Provenance,
    pub build: BuildInfo,
}

/// Shared, immutable request state.
#[derive(Debug, Clone)]
pub struct AppState {
    pub snapshot: Arc<AnalyticsSnapshot>,
    pub health: Arc<Health>,
}

impl AppState {
    pub fn new(snapshot: AnalyticsSnapshot, provenance: Provenance) -> Self {
        let health = Health {
            status: "ok",
            rows: snapshot.total_respondents(),
            provenance,
            build: BuildInfo::current(&snapshot),
        };
        AppState {
            snapshot: Arc::new(snapshot),
            health: Arc::new(health),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RouterOptions {
    /// Directory served at `/` for everything outside `/api`.
    pub assets: Option<PathBuf>,
    /// Allowed CORS origins; empty means any origin.
    pub cors_origins: Vec<String>,
}

pub fn router(state: AppState, options: &RouterOptions) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/communities", get(communities))
        .route("/map", get(map))
        .route("/bars", get(bars))
        .route("/dotplot", get(dotplot))
        .route("/correlations", get(correlations))
        .route("/bin2d", get(bin2d))
        .route("/series", get(series))
        .route("/parallel", get(parallel))
        .route("/density", get(density))
        .fallback(not_found);
    let app = Router::new().nest("/api", api);
    let app = match &options.assets {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.fallback(not_found),
    };
    app.layer(cors(&options.cors_origins))
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

fn cors(origins: &[String]) -> CorsLayer {
    if origins.is_empty() {
        return CorsLayer::permissive();
    }
    let list: Vec<HeaderValue> = origins
        .iter()
        .filter_map(|o| HeaderValue::from_str(o).ok())
        .collect();
    CorsLayer::new()
        .allow_origin(AllowOrigin::list(list))
        .allow_methods([Method::GET])
}

async fn not_found(OriginalUri(uri): OriginalUri) -> ApiError {
    ApiError::not_found(uri.path())
}

type ApiResult<T> = Result<Json<T>, ApiError>;
type RawQuery = Result<Query<BTreeMap<String, String>>, QueryRejection>;

/// Query parameters checked against the names a route accepts.
struct Params(BTreeMap<String, String>);

impl Params {
    fn new(raw: RawQuery, allowed: &[&str]) -> Result<Self, ApiError> {
        let Query(map) = raw.map_err(|e| ApiError::bad_parameter(e.body_text()))?;
        if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ApiError::bad_parameter(format!(
                "unexpected query parameter `{key}` (accepted: {})",
                allowed.join(", ")
            )));
        }
        Ok(Params(map))
    }

    fn get(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    fn required(&self, name: &str) -> Result<&str, ApiError> {
        self.get(name)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| ApiError::missing_parameter(name))
    }

    fn metric(&self, name: &str) -> Result<MetricId, ApiError> {
        Ok(self.required(name)?.parse()?)
    }

    fn years(&self) -> Result<YearFilter, ApiError> {
        Ok(self.get("years").unwrap_or("all").parse()?)
    }

    fn count(&self, name: &str, default: usize) -> Result<usize, ApiError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v.trim().parse().map_err(|_| {
                ApiError::bad_parameter(format!(
                    "`{name}` must be a non-negative integer, got `{v}`"
                ))
            }),
        }
    }

    /// `level` + `id`, defaulting to all communities. Community ids also
    /// accept display names.
    fn selection(&self, snapshot: &AnalyticsSnapshot) -> Result<Selection, ApiError> {
        let level = self.get("level").unwrap_or("all");
        let id = self.get("id");
        let level = if level.trim().eq_ignore_ascii_case("community") {
            let raw = id
                .filter(|s| !s.is_empty())
                .ok_or_else(|| ApiError::missing_parameter("id"))?;
            SelectionLevel::Community(community_id(snapshot, raw)?)
        } else {
            SelectionLevel::parse(level, id)?
        };
        Ok(Selection::new(level, self.years()?))
    }
}

fn community_id(snapshot: &AnalyticsSnapshot, raw: &str) -> Result<CommunityId, ApiError> {
    snapshot
        .registry()
        .lookup_loose(raw)
        .map(|i| snapshot.registry().get(i).id.clone())
        .ok_or_else(|| attache_core::domain::DomainError::UnknownCommunity(raw.to_string()).into())
}

async fn health(State(s): State<AppState>, q: RawQuery) -> ApiResult<Health> {
    Params::new(q, &[])?;
    Ok(Json((*s.health).clone()))
}

async fn communities(State(s): State<AppState>, q: RawQuery) -> ApiResult<Vec<Community>> {
    Params::new(q, &[])?;
    Ok(Json(s.snapshot.registry().communities().to_vec()))
}

#[derive(Debug, Clone, Serialize)]
pub struct MapResponse {
    pub metric: MetricId,
    pub years: YearFilter,
    pub points: Vec<MapPoint>,
}

async fn map(State(s): State<AppState>, q: RawQuery) -> ApiResult<MapResponse> {
    let p = Params::new(q, &["metric", "years"])?;
    let (metric, years) = (p.metric("metric")?, p.years()?);
    Ok(Json(MapResponse {
        metric,
        years,
        points: s.snapshot.map_summary(metric, years),
    }))
}

async fn bars(State(s): State<AppState>, q: RawQuery) -> ApiResult<BarChart> {
    let p = Params::new(q, &["community", "metric", "years"])?;
    let community = community_id(&s.snapshot, p.required("community")?)?;
    Ok(Json(s.snapshot.bar_chart_data(
        p.metric("metric")?,
        p.years()?,
        community.as_str(),
    )?))
}

async fn dotplot(State(s): State<AppState>, q: RawQuery) -> ApiResult<Ranking> {
    let p = Params::new(q, &["metric", "years"])?;
    Ok(Json(
        s.snapshot.community_means(p.metric("metric")?, p.years()?),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct CorrelationResponse {
    pub profile: CorrelationProfile,
    /// All-communities profile for the same years, drawn as the grey reference.
    pub reference: CorrelationProfile,
}

async fn correlations(State(s): State<AppState>, q: RawQuery) -> ApiResult<CorrelationResponse> {
    let p = Params::new(q, &["level", "id", "years"])?;
    let sel = p.selection(&s.snapshot)?;
    Ok(Json(CorrelationResponse {
        profile: s.snapshot.correlation_profile(&sel)?,
        reference: s.snapshot.reference_profile(sel.years),
    }))
}

async fn bin2d(State(s): State<AppState>, q: RawQuery) -> ApiResult<Bin2d> {
    let p = Params::new(q, &["x", "y", "level", "id", "years", "nx", "ny"])?;
    let sel = p.selection(&s.snapshot)?;
    let (nx, ny) = (p.count("nx", DEFAULT_BINS)?, p.count("ny", DEFAULT_BINS)?);
    Ok(Json(s.snapshot.bin2d(
        p.metric("x")?,
        p.metric("y")?,
        &sel,
        nx,
        ny,
    )?))
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesResponse {
    pub metric: MetricId,
    pub series: Vec<CommunitySeries>,
}

async fn series(State(s): State<AppState>, q: RawQuery) -> ApiResult<SeriesResponse> {
    let p = Params::new(q, &["metric", "communities", "years"])?;
    if let Some(y) = p.get("years").filter(|y| !y.eq_ignore_ascii_case("each")) {
        return Err(ApiError::bad_parameter(format!(
            "series always covers each year; `years` must be `each`, got `{y}`"
        )));
    }
    let metric = p.metric("metric")?;
    let raw = p.required("communities")?;
    let ids = if raw.trim().eq_ignore_ascii_case("all") {
        s.snapshot
            .registry()
            .communities()
            .iter()
            .map(|c| c.id.clone())
            .collect()
    } else {
        raw.split(',')
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(|c| community_id(&s.snapshot, c))
            .collect::<Result<Vec<_>, _>>()?
    };
    Ok(Json(SeriesResponse {
        metric,
        series: s.snapshot.yearly_series(metric, &ids)?,
    }))
}

async fn parallel(State(s): State<AppState>, q: RawQuery) -> ApiResult<ParallelCoordinates> {
    let p = Params::new(q, &["years"])?;
    Ok(Json(s.snapshot.parallel_coordinates(p.years()?)))
}

async fn density(State(s): State<AppState>, q: RawQuery) -> ApiResult<Density> {
    let p = Params::new(q, &["metric", "level", "id", "years", "points"])?;
    let sel = p.selection(&s.snapshot)?;
    let points = p.count("points", DEFAULT_DENSITY_POINTS)?;
    Ok(Json(s.snapshot.density_estimate(
        p.metric("metric")?,
        &sel,
        points,
    )?))
}
