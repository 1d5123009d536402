//! Push-game sessions over HTTP. Each session keeps its starting board and
//! the list of pushed regions; the current board is always the replay of
//! that history. Requests touching one session are serialized by its lock.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path as UrlPath, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cryptocomb::pushgame::{count_solutions, invariant_vector, proper_coloring, solve, PushError, SimplexBoard};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameSession {
    pub id: String,
    pub initial: SimplexBoard,
    pub target: Vec<u64>,
    pub history: Vec<usize>,
    pub seed: Option<u64>,
}

impl GameSession {
    pub fn current(&self) -> SimplexBoard {
        self.history.iter().fold(self.initial.clone(), |b, &r| b.push(r, 1).expect("history holds valid regions"))
    }

    pub fn state(&self) -> BoardState {
        let board = self.current();
        let coloring = proper_coloring(&board);
        let invariant = |labels: &[u64]| {
            let c = coloring.as_ref()?;
            invariant_vector(&board.with_labels(labels.to_vec()).ok()?, c).ok()
        };
        let solution_count = count_solutions(&board, &self.target).expect("target validated on creation");
        BoardState {
            id: self.id.clone(),
            n: board.n(),
            m: board.m(),
            vertices: board.vertex_count(),
            regions: board.regions().to_vec(),
            invariant: invariant(board.labels()),
            target_invariant: invariant(&self.target),
            solvable: solution_count > 0u32.into(),
            solution_count: solution_count.to_string(),
            solved: board.labels() == self.target.as_slice(),
            labels: board.labels().to_vec(),
            target: self.target.clone(),
            history: self.history.clone(),
        }
    }
}

/// What the client sees. `invariant` fields are absent when the board has no
/// proper coloring; `solution_count` is a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardState {
    pub id: String,
    pub n: usize,
    pub m: u64,
    pub vertices: usize,
    pub regions: Vec<Vec<usize>>,
    pub labels: Vec<u64>,
    pub target: Vec<u64>,
    pub history: Vec<usize>,
    pub invariant: Option<Vec<u64>>,
    pub target_invariant: Option<Vec<u64>>,
    pub solvable: bool,
    pub solution_count: String,
    pub solved: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateRequest {
    /// `triangular:R` or `hexagonal:S`.
    pub builder: Option<String>,
    pub board: Option<SimplexBoard>,
    pub m: Option<u64>,
    pub labels: Option<Vec<u64>>,
    /// Defaults to every label 1.
    pub target: Option<Vec<u64>>,
    /// Random starting labels, unless `labels` is given.
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushRequest {
    pub region: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hint {
    /// `None` once the target is reached.
    pub region: Option<usize>,
    pub times: u64,
    pub plan: Vec<u64>,
}

#[derive(Debug)]
pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn bad(e: impl ToString) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, e.to_string())
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        bad(r.body_text())
    }
}

impl From<PushError> for ApiError {
    fn from(e: PushError) -> Self {
        bad(e)
    }
}

type Shared = Arc<Mutex<GameSession>>;

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Shared>>>,
    data: Option<Arc<PathBuf>>,
}

impl AppState {
    pub fn new() -> AppState {
        AppState::default()
    }

    /// Snapshots go to `dir`, and sessions already there are loaded.
    pub fn persistent(dir: &Path) -> io::Result<AppState> {
        std::fs::create_dir_all(dir)?;
        let mut sessions = HashMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let s: GameSession = serde_json::from_str(&std::fs::read_to_string(&path)?)
                    .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
                let regions = s.initial.region_count();
                if s.history.iter().any(|&r| r >= regions) || s.initial.check_labels(&s.target).is_err() {
                    let msg = format!("{}: history or target does not fit the board", path.display());
                    return Err(io::Error::new(io::ErrorKind::InvalidData, msg));
                }
                sessions.insert(s.id.clone(), Arc::new(Mutex::new(s)));
            }
        }
        Ok(AppState { sessions: Arc::new(RwLock::new(sessions)), data: Some(Arc::new(dir.to_path_buf())) })
    }

    pub fn session_ids(&self) -> Vec<String> {
        self.sessions.read().unwrap_or_else(PoisonError::into_inner).keys().cloned().collect()
    }

    fn get(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions
            .read()
            .unwrap_or_else(PoisonError::into_inner)
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("no session {id}")))
    }

    fn save(&self, s: &GameSession) -> Result<(), ApiError> {
        let Some(dir) = &self.data else {
            return Ok(());
        };
        let fail = |e: io::Error| ApiError(StatusCode::INTERNAL_SERVER_ERROR, format!("snapshot: {e}"));
        let tmp = dir.join(format!("{}.json.tmp", s.id));
        std::fs::write(&tmp, serde_json::to_vec(s).expect("sessions serialize")).map_err(fail)?;
        std::fs::rename(&tmp, dir.join(format!("{}.json", s.id))).map_err(fail)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/boards", post(create))
        .route("/api/boards/{id}", get(show))
        .route("/api/boards/{id}/push", post(push))
        .route("/api/boards/{id}/undo", post(undo))
        .route("/api/boards/{id}/hint", get(hint))
        .with_state(state)
}

fn new_session(req: CreateRequest) -> Result<GameSession, ApiError> {
    let mut board = match (req.builder, req.board) {
        (Some(spec), None) => SimplexBoard::build(&spec, req.m.unwrap_or(2))?,
        (None, Some(b)) => match req.m {
            Some(m) if m != b.m() => b.with_modulus(m)?,
            _ => b,
        },
        _ => return Err(bad("give exactly one of builder and board")),
    };
    if let Some(labels) = req.labels {
        board = board.with_labels(labels)?;
    } else if let Some(seed) = req.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = (0..board.vertex_count()).map(|_| rng.gen_range(0..board.m())).collect();
        board = board.with_labels(labels)?;
    }
    let target = req.target.unwrap_or_else(|| vec![1 % board.m(); board.vertex_count()]);
    board.check_labels(&target)?;
    let id = format!("{:016x}", rand::random::<u64>());
    Ok(GameSession { id, initial: board, target, history: Vec::new(), seed: req.seed })
}

async fn create(
    State(state): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<serde_json::Value>), ApiError> {
    let Json(req) = body?;
    let session = new_session(req)?;
    state.save(&session)?;
    let out = json!({ "id": session.id, "state": session.state() });
    state
        .sessions
        .write()
        .unwrap_or_else(PoisonError::into_inner)
        .insert(session.id.clone(), Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(out)))
}

async fn show(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<BoardState>, ApiError> {
    let s = state.get(&id)?;
    let s = s.lock().unwrap_or_else(PoisonError::into_inner);
    Ok(Json(s.state()))
}

async fn push(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    body: Result<Json<PushRequest>, JsonRejection>,
) -> Result<Json<BoardState>, ApiError> {
    let shared = state.get(&id)?;
    let Json(req) = body?;
    let mut s = shared.lock().unwrap_or_else(PoisonError::into_inner);
    if req.region >= s.initial.region_count() {
        return Err(bad(PushError::BadRegion(req.region)));
    }
    s.history.push(req.region);
    if let Err(e) = state.save(&s) {
        s.history.pop();
        return Err(e);
    }
    Ok(Json(s.state()))
}

async fn undo(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<BoardState>, ApiError> {
    let shared = state.get(&id)?;
    let mut s = shared.lock().unwrap_or_else(PoisonError::into_inner);
    let Some(last) = s.history.pop() else {
        return Err(ApiError(StatusCode::CONFLICT, "nothing to undo".into()));
    };
    if let Err(e) = state.save(&s) {
        s.history.push(last);
        return Err(e);
    }
    Ok(Json(s.state()))
}

/// First region of a fresh plan from the current labels to the target.
async fn hint(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Result<Json<Hint>, ApiError> {
    let shared = state.get(&id)?;
    let s = shared.lock().unwrap_or_else(PoisonError::into_inner);
    let board = s.current();
    let plan = solve(&board, &s.target)?.ok_or_else(|| ApiError(StatusCode::CONFLICT, "no_solution".into()))?;
    let first = plan.0.iter().position(|&x| x != 0);
    Ok(Json(Hint { region: first, times: first.map_or(0, |k| plan.0[k]), plan: plan.0 }))
}
