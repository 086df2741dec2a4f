//! The HTTP API under `/api/v1`, plus `/embed.js`.
//!
//! Reads work without credentials and run as the anonymous requester (whose
//! own-data views are empty). Catalog changes need a bearer token; ingest
//! needs an admin token. Error bodies are JSON objects with the error's
//! fields and a human-readable `message`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use tower_http::services::{ServeDir, ServeFile};
use lava_core::catalog::{Actor, CatalogError, CatalogOp, CatalogOutcome, GoalStatus, IndicatorRecord};
use lava_core::chart::ChartChoice;
use lava_core::indicator::{check_composable, IndicatorError, IndicatorSpec};
use lava_core::ingest::RawEvent;
use lava_core::irc::{generate_irc, IrcError, IrcTarget};
use lava_core::methods::MappingSet;
use lava_core::model::{dataset_schema, Column};
use lava_core::query::{list_attribute_values, query_dataset, DatasetScope, FilterSet, QueryError};
use lava_core::store::Dimension;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::state::{AppState, MutationError};

pub const EMBED_JS: &str = include_str!("../assets/embed.js");

/// Largest accepted event batch body.
pub const INGEST_LIMIT: usize = 64 << 20;

/// The requester id used when no token is sent. Event user ids are never
/// empty, so it matches nobody.
pub const ANONYMOUS: &str = "";

type Shared = State<Arc<AppState>>;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Serialize, message: impl ToString) -> Self {
        let mut body = serde_json::to_value(error).unwrap_or(Value::Null);
        if !body.is_object() {
            body = json!({ "error": body });
        }
        body["message"] = Value::String(message.to_string());
        Self { status, body }
    }

    fn plain(status: StatusCode, error: &str, message: impl ToString) -> Self {
        Self::new(status, json!({ "error": error }), message)
    }

    fn unauthorized() -> Self {
        Self::plain(StatusCode::UNAUTHORIZED, "unauthorized", "a valid bearer token is required")
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::plain(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn not_found(what: &str, id: &str) -> Self {
        Self::plain(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} {id:?}"))
    }

    fn internal(message: impl ToString) -> Self {
        tracing::error!(error = %message.to_string(), "request failed");
        Self::plain(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<IndicatorError> for ApiError {
    fn from(e: IndicatorError) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, &e, &e)
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, &e, &e)
    }
}

impl From<CatalogError> for ApiError {
    fn from(e: CatalogError) -> Self {
        use CatalogError::*;
        let status = match &e {
            NotAdmin | NotOwner(_) => StatusCode::FORBIDDEN,
            UnknownGoal(_) | UnknownQuestion(_) | UnknownIndicator(_) => StatusCode::NOT_FOUND,
            DuplicateGoal(_) | AlreadyAssociated { .. } | RestrictDelete { .. } | BreaksComposite(_) | KindChange { .. } => {
                StatusCode::CONFLICT
            }
            GoalNotPending(_) | GoalNotActive(_) | NotAssociated { .. } | PartNotBasic(_) | Empty(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
        };
        Self::new(status, &e, &e)
    }
}

impl From<MutationError> for ApiError {
    fn from(e: MutationError) -> Self {
        match e {
            MutationError::Catalog(e) => e.into(),
            MutationError::Indicator(e) => e.into(),
            MutationError::Journal(e) => Self::internal(e),
        }
    }
}

impl From<IrcError> for ApiError {
    fn from(e: IrcError) -> Self {
        Self::new(StatusCode::NOT_FOUND, &e, &e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn caller(state: &AppState, headers: &HeaderMap) -> Option<Actor> {
    let value = headers.get(header::AUTHORIZATION)?.to_str().ok()?;
    state.tokens.authenticate(value).cloned()
}

fn require(state: &AppState, headers: &HeaderMap) -> ApiResult<Actor> {
    caller(state, headers).ok_or_else(ApiError::unauthorized)
}

fn requester(state: &AppState, headers: &HeaderMap) -> String {
    caller(state, headers).map_or_else(|| ANONYMOUS.to_string(), |a| a.user_id)
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/health", get(health))
        .route("/events", post(ingest).layer(DefaultBodyLimit::max(INGEST_LIMIT)))
        .route("/schemas", get(schemas))
        .route("/dimensions/{name}", get(dimension_values))
        .route("/attributes", get(attributes))
        .route("/attribute-values", get(attribute_values))
        .route("/query", post(query))
        .route("/methods", get(methods))
        .route("/methods/{id}", get(method))
        .route("/methods/{id}/suggest", post(suggest))
        .route("/methods/{id}/validate", post(validate_method_mapping))
        .route("/charts", get(charts))
        .route("/charts/validate", post(validate_chart))
        .route("/charts/{library_id}", get(chart_types))
        .route("/composable", post(composable))
        .route("/preview", post(preview))
        .route("/render/{id}", get(render))
        .route("/irc/{id}", get(irc_indicator))
        .route("/irc/question/{id}", get(irc_question))
        .route("/goals", get(goals).post(request_goal))
        .route("/goals/{id}/review", post(review_goal))
        .route("/questions", get(questions).post(save_question))
        .route("/questions/{id}", get(question).delete(delete_question))
        .route("/questions/{id}/indicators", post(associate).delete(disassociate_body))
        .route("/questions/{id}/indicators/{indicator_id}", axum::routing::delete(disassociate))
        .route("/indicators", get(indicators).post(save_indicator))
        .route("/indicators/{id}", get(indicator).put(update_indicator).delete(delete_indicator))
        .route("/indicators/{id}/copy", post(copy_indicator));
    let mut router = Router::new().nest("/api/v1", api).route("/embed.js", get(embed_js));
    if let Some(dir) = &state.settings.app_dir {
        let index = dir.join("index.html");
        router = router.nest_service("/app", ServeDir::new(dir).fallback(ServeFile::new(index)));
    }
    router
        .fallback(|| async { ApiError::plain(StatusCode::NOT_FOUND, "not_found", "no such route") })
        .with_state(state)
}

async fn embed_js() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/javascript; charset=utf-8")], EMBED_JS)
}

async fn health(State(state): Shared) -> ApiResult<Json<Value>> {
    let digests = blocking(move || state.digests()).await?;
    Ok(Json(json!({
        "status": "ok",
        "events": digests.events,
        "store_digest": digests.store_digest,
        "catalog_digest": digests.catalog_digest,
    })))
}

async fn ingest(State(state): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Json<Value>> {
    let actor = require(&state, &headers)?;
    if !actor.admin {
        return Err(CatalogError::NotAdmin.into());
    }
    let docs: Vec<Value> = parse(&body)?;
    let report = blocking(move || state.ingest(docs.into_iter().map(RawEvent::Document).collect())).await?;
    let report = report.map_err(ApiError::internal)?;
    Ok(Json(serde_json::to_value(report).expect("reports serialize")))
}

async fn schemas(State(state): Shared) -> Json<Value> {
    Json(serde_json::to_value(&state.schemas).expect("schemas serialize"))
}

async fn dimension_values(State(state): Shared, Path(name): Path<String>) -> ApiResult<Json<Vec<String>>> {
    let dimension: Dimension = name.parse().map_err(|_| ApiError::not_found("dimension", &name))?;
    Ok(Json(state.read_store(|s| s.dimension_values(dimension).iter().cloned().collect())))
}

/// Query-string scope: each dimension as repeated or comma-separated values.
#[derive(Default)]
struct ScopeQuery {
    scope: DatasetScope,
    attribute: Option<String>,
    prefix: String,
}

impl ScopeQuery {
    fn from_pairs(pairs: Vec<(String, String)>) -> ApiResult<Self> {
        let mut q = Self::default();
        for (key, value) in pairs {
            let target = match key.as_str() {
                "sources" | "source" => &mut q.scope.sources,
                "platforms" | "platform" => &mut q.scope.platforms,
                "actions" | "action" => &mut q.scope.actions,
                "categories" | "category" => &mut q.scope.categories,
                "attribute" => {
                    q.attribute = Some(value);
                    continue;
                }
                "prefix" | "q" => {
                    q.prefix = value;
                    continue;
                }
                other => return Err(ApiError::bad_request(format!("unknown query parameter {other:?}"))),
            };
            target.extend(value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from));
        }
        Ok(q)
    }
}

#[derive(Serialize)]
struct AttributeInfo {
    name: String,
    #[serde(rename = "type")]
    column_type: lava_core::model::ColumnType,
}

async fn attributes(State(state): Shared, Query(pairs): Query<Vec<(String, String)>>) -> ApiResult<Json<Vec<AttributeInfo>>> {
    let q = ScopeQuery::from_pairs(pairs)?;
    Ok(Json(
        state
            .schemas
            .common_attributes(&q.scope.categories)
            .into_iter()
            .map(|a| AttributeInfo { name: a.name, column_type: a.column_type })
            .collect(),
    ))
}

async fn attribute_values(State(state): Shared, Query(pairs): Query<Vec<(String, String)>>) -> ApiResult<Json<Value>> {
    let q = ScopeQuery::from_pairs(pairs)?;
    let attribute = q.attribute.ok_or_else(|| ApiError::bad_request("the attribute parameter is required"))?;
    let values = state.read_store(|store| list_attribute_values(store, &state.schemas, &q.scope, &attribute, &q.prefix))?;
    Ok(Json(serde_json::to_value(values).expect("scalars serialize")))
}

#[derive(Deserialize)]
struct QueryRequest {
    scope: DatasetScope,
    #[serde(default)]
    filters: FilterSet,
}

async fn query(State(state): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Json<Value>> {
    let req: QueryRequest = parse(&body)?;
    let who = requester(&state, &headers);
    let table = blocking(move || {
        state.read_store(|store| query_dataset(store, &state.schemas, &state.pseudonymizer, &req.scope, &req.filters, &who))
    })
    .await??;
    Ok(Json(serde_json::to_value(table).expect("tables serialize")))
}

async fn methods(State(state): Shared) -> Json<Value> {
    Json(serde_json::to_value(state.methods.list()).expect("descriptors serialize"))
}

async fn method(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let d = state.methods.descriptor(&id).ok_or_else(|| ApiError::not_found("method", &id))?;
    Ok(Json(serde_json::to_value(d).expect("descriptors serialize")))
}

/// Table columns given directly, or the dataset schema of a scope.
#[derive(Deserialize)]
struct ColumnsRequest {
    #[serde(default)]
    columns: Option<Vec<Column>>,
    #[serde(default)]
    scope: Option<DatasetScope>,
    #[serde(default)]
    mappings: MappingSet,
}

impl ColumnsRequest {
    fn columns(&self, state: &AppState) -> ApiResult<Vec<Column>> {
        match (&self.columns, &self.scope) {
            (Some(columns), _) => Ok(columns.clone()),
            (None, Some(scope)) => Ok(dataset_schema(&scope.categories, &state.schemas)),
            (None, None) => Err(ApiError::bad_request("give either columns or scope")),
        }
    }
}

async fn suggest(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<MappingSet>> {
    let req: ColumnsRequest = parse(&body)?;
    let d = state.methods.descriptor(&id).ok_or_else(|| ApiError::not_found("method", &id))?;
    Ok(Json(d.suggest_mappings(&req.columns(&state)?)))
}

async fn validate_method_mapping(State(state): Shared, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ColumnsRequest = parse(&body)?;
    let d = state.methods.descriptor(&id).ok_or_else(|| ApiError::not_found("method", &id))?;
    Ok(Json(match d.validate_mapping(&req.columns(&state)?, &req.mappings) {
        Ok(()) => json!({ "valid": true, "violations": [] }),
        Err(report) => json!({ "valid": false, "violations": report }),
    }))
}

async fn charts(State(state): Shared) -> Json<Value> {
    Json(serde_json::to_value(state.charts.families()).expect("families serialize"))
}

async fn chart_types(State(state): Shared, Path(library_id): Path<String>) -> Json<Value> {
    Json(serde_json::to_value(state.charts.list_chart_types(&library_id)).expect("chart types serialize"))
}

#[derive(Deserialize)]
struct ChartValidation {
    choice: ChartChoice,
    columns: Vec<Column>,
}

async fn validate_chart(State(state): Shared, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ChartValidation = parse(&body)?;
    Ok(Json(match state.charts.validate_viz_mapping(&req.choice, &req.columns) {
        Ok(()) => json!({ "valid": true }),
        Err(e) => {
            let mut body = json!({ "valid": false, "message": e.to_string() });
            body["error"] = serde_json::to_value(&e).expect("errors serialize");
            body
        }
    }))
}

#[derive(Deserialize)]
struct ComposableRequest {
    indicators: Vec<String>,
    #[serde(default)]
    first: usize,
}

/// Splits saved basic indicators by whether they share the analytics method
/// of `indicators[first]`. Results are indicator ids.
async fn composable(State(state): Shared, body: Bytes) -> ApiResult<Json<Value>> {
    let req: ComposableRequest = parse(&body)?;
    let method_ids = state.read_catalog(|catalog| {
        req.indicators
            .iter()
            .map(|id| match catalog.indicator(id) {
                Some(IndicatorRecord { spec: IndicatorSpec::Basic(b), .. }) => Ok(b.method_id.clone()),
                Some(_) => Err(CatalogError::PartNotBasic(id.clone())),
                None => Err(CatalogError::UnknownIndicator(id.clone())),
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    if req.first >= method_ids.len() {
        return Err(ApiError::bad_request("first is out of range"));
    }
    let refs: Vec<&str> = method_ids.iter().map(String::as_str).collect();
    let split = check_composable(&refs, req.first);
    let ids = |positions: &[usize]| positions.iter().map(|&i| req.indicators[i].clone()).collect::<Vec<_>>();
    Ok(Json(json!({
        "method_id": method_ids[req.first],
        "compatible": ids(&split.compatible),
        "incompatible": ids(&split.incompatible),
    })))
}

/// Accepts a bare spec or `{"spec": ...}`.
fn parse_spec(body: &Bytes) -> ApiResult<IndicatorSpec> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Body {
        Wrapped { spec: IndicatorSpec },
        Bare(IndicatorSpec),
    }
    let value: Value = parse(body)?;
    let parsed = serde_json::from_value::<Body>(value.clone()).map_err(|_| {
        // Re-run on the likely intended shape for a useful message.
        let inner = value.get("spec").cloned().unwrap_or(value);
        match serde_json::from_value::<IndicatorSpec>(inner) {
            Err(e) => ApiError::bad_request(format!("invalid indicator spec: {e}")),
            Ok(_) => ApiError::bad_request("invalid indicator spec"),
        }
    })?;
    Ok(match parsed {
        Body::Wrapped { spec } | Body::Bare(spec) => spec,
    })
}

async fn preview(State(state): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Json<Value>> {
    let spec = parse_spec(&body)?;
    let who = requester(&state, &headers);
    let run = blocking(move || state.execute(&spec, &who)).await??;
    Ok(Json(serde_json::to_value(run).expect("runs serialize")))
}

async fn render(State(state): Shared, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    let spec = state
        .read_catalog(|c| c.indicator(&id).map(|r| r.spec.clone()))
        .ok_or_else(|| ApiError::not_found("indicator", &id))?;
    let who = requester(&state, &headers);
    let run = blocking(move || state.execute(&spec, &who)).await??;
    Ok((
        // Embeds live on other origins.
        [(header::ACCESS_CONTROL_ALLOW_ORIGIN, "*")],
        Json(run.chart),
    )
        .into_response())
}

fn base_url(state: &AppState, headers: &HeaderMap) -> String {
    if let Some(url) = &state.settings.base_url {
        return url.clone();
    }
    let host = headers
        .get(header::HOST)
        .and_then(|h| h.to_str().ok())
        .unwrap_or("localhost");
    format!("http://{host}")
}

fn html(snippet: String) -> Response {
    ([(header::CONTENT_TYPE, "text/html; charset=utf-8")], snippet).into_response()
}

async fn irc_indicator(State(state): Shared, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    let base = base_url(&state, &headers);
    Ok(html(state.read_catalog(|c| generate_irc(c, IrcTarget::Indicator(&id), &base))?))
}

async fn irc_question(State(state): Shared, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    let base = base_url(&state, &headers);
    Ok(html(state.read_catalog(|c| generate_irc(c, IrcTarget::Question(&id), &base))?))
}

fn outcome_value(outcome: CatalogOutcome) -> Value {
    match outcome {
        CatalogOutcome::Goal(g) => serde_json::to_value(g),
        CatalogOutcome::Question(q) => serde_json::to_value(q),
        CatalogOutcome::Indicator(r) => serde_json::to_value(r),
        CatalogOutcome::GoalRejected(id) => Ok(json!({ "goal_id": id, "rejected": true })),
        CatalogOutcome::Deleted(id) => Ok(json!({ "deleted": id })),
    }
    .expect("catalog values serialize")
}

async fn mutate(state: Arc<AppState>, headers: &HeaderMap, op: CatalogOp, created: bool) -> ApiResult<Response> {
    let actor = require(&state, headers)?;
    let outcome = blocking(move || state.mutate(actor, op)).await??;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(outcome_value(outcome))).into_response())
}

#[derive(Deserialize)]
struct GoalFilter {
    #[serde(default)]
    status: Option<GoalStatus>,
}

async fn goals(State(state): Shared, Query(filter): Query<GoalFilter>) -> Json<Value> {
    Json(state.read_catalog(|c| {
        let goals: Vec<_> = c.goals().filter(|g| filter.status.is_none_or(|s| g.status == s)).collect();
        serde_json::to_value(goals).expect("goals serialize")
    }))
}

#[derive(Deserialize)]
struct GoalRequest {
    name: String,
    #[serde(default)]
    description: String,
}

async fn request_goal(State(state): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let req: GoalRequest = parse(&body)?;
    mutate(state, &headers, CatalogOp::RequestGoal { name: req.name, description: req.description }, true).await
}

#[derive(Deserialize)]
struct Review {
    approve: bool,
}

async fn review_goal(State(state): Shared, headers: HeaderMap, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: Review = parse(&body)?;
    mutate(state, &headers, CatalogOp::ReviewGoal { goal_id: id, approve: req.approve }, false).await
}

#[derive(Deserialize)]
struct QuestionFilter {
    #[serde(default)]
    goal_id: Option<String>,
}

async fn questions(State(state): Shared, Query(filter): Query<QuestionFilter>) -> Json<Value> {
    Json(state.read_catalog(|c| {
        let list: Vec<_> = c
            .questions()
            .filter(|q| filter.goal_id.as_ref().is_none_or(|g| &q.goal_id == g))
            .collect();
        serde_json::to_value(list).expect("questions serialize")
    }))
}

async fn question(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    state
        .read_catalog(|c| c.question(&id).map(|q| serde_json::to_value(q).expect("questions serialize")))
        .map(Json)
        .ok_or_else(|| CatalogError::UnknownQuestion(id).into())
}

#[derive(Deserialize)]
struct QuestionRequest {
    goal_id: String,
    text: String,
}

async fn save_question(State(state): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let req: QuestionRequest = parse(&body)?;
    mutate(state, &headers, CatalogOp::SaveQuestion { goal_id: req.goal_id, text: req.text }, true).await
}

async fn delete_question(State(state): Shared, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    mutate(state, &headers, CatalogOp::DeleteQuestion { question_id: id }, false).await
}

#[derive(Deserialize)]
struct IndicatorRef {
    indicator_id: String,
}

async fn associate(State(state): Shared, headers: HeaderMap, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: IndicatorRef = parse(&body)?;
    mutate(state, &headers, CatalogOp::AssociateIndicator { question_id: id, indicator_id: req.indicator_id }, false).await
}

async fn disassociate_body(State(state): Shared, headers: HeaderMap, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let req: IndicatorRef = parse(&body)?;
    mutate(state, &headers, CatalogOp::DisassociateIndicator { question_id: id, indicator_id: req.indicator_id }, false).await
}

async fn disassociate(State(state): Shared, headers: HeaderMap, Path((id, indicator_id)): Path<(String, String)>) -> ApiResult<Response> {
    mutate(state, &headers, CatalogOp::DisassociateIndicator { question_id: id, indicator_id }, false).await
}

#[derive(Deserialize)]
struct IndicatorFilter {
    #[serde(default)]
    owner: Option<String>,
    #[serde(default)]
    kind: Option<lava_core::indicator::IndicatorKind>,
}

async fn indicators(State(state): Shared, Query(filter): Query<IndicatorFilter>) -> Json<Value> {
    Json(state.read_catalog(|c| {
        let list: Vec<_> = c
            .indicators()
            .filter(|r| filter.owner.as_ref().is_none_or(|o| &r.owner == o))
            .filter(|r| filter.kind.is_none_or(|k| r.kind == k))
            .collect();
        serde_json::to_value(list).expect("indicators serialize")
    }))
}

async fn indicator(State(state): Shared, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    state
        .read_catalog(|c| c.indicator(&id).map(|r| serde_json::to_value(r).expect("indicators serialize")))
        .map(Json)
        .ok_or_else(|| CatalogError::UnknownIndicator(id).into())
}

async fn save_indicator(State(state): Shared, headers: HeaderMap, body: Bytes) -> ApiResult<Response> {
    let spec = parse_spec(&body)?;
    mutate(state, &headers, CatalogOp::SaveIndicator { spec }, true).await
}

async fn update_indicator(State(state): Shared, headers: HeaderMap, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let spec = parse_spec(&body)?;
    mutate(state, &headers, CatalogOp::UpdateIndicator { indicator_id: id, spec }, false).await
}

async fn delete_indicator(State(state): Shared, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    mutate(state, &headers, CatalogOp::DeleteIndicator { indicator_id: id }, false).await
}

async fn copy_indicator(State(state): Shared, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Response> {
    mutate(state, &headers, CatalogOp::CopyIndicator { indicator_id: id }, true).await
}
