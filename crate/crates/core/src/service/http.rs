//! JSON-over-HTTP binding of [`Service`].
//!
//! | Method | Path | Auth | Body | Response |
//! |---|---|---|---|---|
//! | POST | `/register` | none | `{user_id, password, display_name?}` | `201 {user_id}` |
//! | POST | `/login` | none | `{user_id, password}` | `{token, user_id, role, expiry}` |
//! | POST | `/logout` | bearer | none | `204` |
//! | POST | `/ils` | bearer | `{answers: "ABBA..."}` (44 letters) | `{scores}` |
//! | GET | `/profile` | bearer | | `{user_id, scores, accumulators, plan}` |
//! | GET | `/modules` | none | | `[{id, title, course}]` |
//! | GET | `/modules/{id}/page` | bearer | | `{module, plan, resources, alternates}` |
//! | POST | `/events` | bearer | `{kind: "GalleryView"}` | `{dimension, delta, accumulator_after}` |
//! | POST | `/survey` | none | `{respondent_id, scores: [15 x 1..=5]}` | `204` |
//! | GET | `/survey/summary` | none | | `{Learner: 4.0, ..}` or `"no data"` per dimension |
//! | GET | `/admin/agents` | admin | | `[guid]` |
//! | GET | `/admin/trace` | admin | | `text/plain` trace |
//!
//! Errors are `{error, message}` with the status taken from [`ServiceError`].

use std::sync::Arc;

use axum::extract::{FromRequestParts, Path, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};

use super::{Service, ServiceError, Session, SurveyResponse};
use crate::style::{BehaviorEventKind, IlsAnswerSheet};

impl ServiceError {
    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Validation(_) => StatusCode::BAD_REQUEST,
            ServiceError::Unauthenticated | ServiceError::BadCredentials => StatusCode::UNAUTHORIZED,
            ServiceError::Forbidden => StatusCode::FORBIDDEN,
            ServiceError::Conflict(_) => StatusCode::CONFLICT,
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::ProfileRequired => StatusCode::PRECONDITION_REQUIRED,
            ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Validation(_) => "validation",
            ServiceError::Unauthenticated => "unauthenticated",
            ServiceError::BadCredentials => "bad_credentials",
            ServiceError::Forbidden => "forbidden",
            ServiceError::Conflict(_) => "conflict",
            ServiceError::NotFound(_) => "not_found",
            ServiceError::ProfileRequired => "profile_required",
            ServiceError::Internal(_) => "internal",
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if let ServiceError::Internal(m) = &self {
            log::error!("{m}");
        }
        let body = ErrorBody { error: self.code().into(), message: self.to_string() };
        (self.status(), Json(body)).into_response()
    }
}

/// A validated bearer session.
pub struct Authenticated(pub Session);

impl FromRequestParts<Arc<Service>> for Authenticated {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, service: &Arc<Service>) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(ServiceError::Unauthenticated)?;
        service.authenticate(token.trim()).map(Authenticated)
    }
}

/// JSON body whose rejection is reported in the service's error shape.
pub struct Body<T>(pub T);

impl<T, S> axum::extract::FromRequest<S> for Body<T>
where
    Json<T>: axum::extract::FromRequest<S, Rejection = axum::extract::rejection::JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ServiceError;

    async fn from_request(req: axum::extract::Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state).await.map(|Json(v)| Body(v)).map_err(|e| ServiceError::Validation(e.body_text()))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub user_id: String,
    pub password: String,
    #[serde(default)]
    pub display_name: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LoginRequest {
    pub user_id: String,
    pub password: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IlsRequest {
    pub answers: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EventRequest {
    pub kind: String,
}

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/register", post(register))
        .route("/login", post(login))
        .route("/logout", post(logout))
        .route("/ils", post(submit_ils))
        .route("/profile", get(profile))
        .route("/modules", get(modules))
        .route("/modules/{id}/page", get(page))
        .route("/events", post(post_event))
        .route("/survey", post(survey_submit))
        .route("/survey/summary", get(survey_summary))
        .route("/admin/agents", get(admin_agents))
        .route("/admin/trace", get(admin_trace))
        .with_state(service)
}

async fn register(State(svc): State<Arc<Service>>, Body(req): Body<RegisterRequest>) -> Result<impl IntoResponse, ServiceError> {
    let user_id = svc.register(&req.user_id, &req.password, req.display_name.as_deref())?;
    Ok((StatusCode::CREATED, Json(serde_json::json!({ "user_id": user_id }))))
}

async fn login(State(svc): State<Arc<Service>>, Body(req): Body<LoginRequest>) -> Result<Json<Session>, ServiceError> {
    svc.login(&req.user_id, &req.password).map(Json)
}

async fn logout(State(svc): State<Arc<Service>>, Authenticated(s): Authenticated) -> Result<StatusCode, ServiceError> {
    svc.logout(&s.token)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn submit_ils(
    State(svc): State<Arc<Service>>,
    Authenticated(s): Authenticated,
    Body(req): Body<IlsRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    let sheet: IlsAnswerSheet = req.answers.parse()?;
    let scores = svc.submit_ils(&s, &sheet)?;
    Ok(Json(serde_json::json!({ "scores": scores })))
}

async fn profile(State(svc): State<Arc<Service>>, Authenticated(s): Authenticated) -> Result<impl IntoResponse, ServiceError> {
    svc.profile(&s).map(Json)
}

async fn modules(State(svc): State<Arc<Service>>) -> Result<impl IntoResponse, ServiceError> {
    svc.modules().map(Json)
}

async fn page(
    State(svc): State<Arc<Service>>,
    Authenticated(s): Authenticated,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ServiceError> {
    svc.get_page(&s, &id).map(Json)
}

async fn post_event(
    State(svc): State<Arc<Service>>,
    Authenticated(s): Authenticated,
    Body(req): Body<EventRequest>,
) -> Result<impl IntoResponse, ServiceError> {
    let kind: BehaviorEventKind = req.kind.parse()?;
    svc.post_event(&s, kind).map(Json)
}

async fn survey_submit(State(svc): State<Arc<Service>>, Body(resp): Body<SurveyResponse>) -> Result<StatusCode, ServiceError> {
    svc.survey_submit(resp)?;
    Ok(StatusCode::NO_CONTENT)
}

async fn survey_summary(State(svc): State<Arc<Service>>) -> impl IntoResponse {
    Json(svc.survey_summary())
}

async fn admin_agents(State(svc): State<Arc<Service>>, Authenticated(s): Authenticated) -> Result<impl IntoResponse, ServiceError> {
    let agents: Vec<String> = svc.admin_agents(&s)?.iter().map(|a| a.guid()).collect();
    Ok(Json(agents))
}

async fn admin_trace(State(svc): State<Arc<Service>>, Authenticated(s): Authenticated) -> Result<impl IntoResponse, ServiceError> {
    let trace = svc.admin_trace(&s)?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], trace))
}
