//! One steering session as a synchronous state machine. The server drives it
//! from a dedicated thread; tests and [`replay`] drive it directly.

use bigen_core::analytics::{self, fit_distribution_shape};
use bigen_core::{Bigraph, GeneratorParams, Modality, RunState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::protocol::{Ack, ClientMessage, ControlAction, ErrorCode, RunFlags, ServerMessage, Snapshot};
use crate::report::{BlccJson, Counts, FitJson, HistogramJson, Histograms, NeighborhoodJson, REPORT_FORMAT};
use crate::{derive_seed, metrics};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    /// Cadence of periodic snapshots, in iterations.
    pub snapshot_every: u64,
    pub histogram_bins: usize,
    /// Modalities with more nodes than this are sampled for BLCC and
    /// neighborhood means.
    pub sample_threshold: usize,
    pub sample_size: usize,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig { snapshot_every: 100, histogram_bins: 64, sample_threshold: 10_000, sample_size: 500 }
    }
}

/// An accepted client message and the iteration count it was applied at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub t: u64,
    pub message: ClientMessage,
}

#[derive(Debug, Clone)]
pub struct Session {
    initial: GeneratorParams,
    seed: u64,
    config: SessionConfig,
    state: RunState,
    seq: u64,
    running: bool,
    speed: Option<f64>,
    log: Vec<LoggedEvent>,
    latest: Option<Snapshot>,
}

impl Session {
    /// A paused session at `t = 0` and its first snapshot.
    pub fn open(params: GeneratorParams, seed: u64, config: SessionConfig) -> Result<(Self, Snapshot), bigen_core::Error> {
        if config.snapshot_every == 0 {
            return Err(bigen_core::Error::InvalidParam { field: "snapshot_every", reason: "must be positive" });
        }
        let mut s = Session {
            initial: params,
            seed,
            config,
            state: RunState::new(params, seed)?,
            seq: 0,
            running: false,
            speed: None,
            log: Vec::new(),
            latest: None,
        };
        let first = s.snapshot();
        Ok((s, first))
    }

    pub fn t(&self) -> u64 {
        self.state.t()
    }

    pub fn params(&self) -> &GeneratorParams {
        self.state.params()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn graph(&self) -> &Bigraph {
        self.state.graph()
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    pub fn speed(&self) -> Option<f64> {
        self.speed
    }

    pub fn log(&self) -> &[LoggedEvent] {
        &self.log
    }

    pub fn latest(&self) -> Option<&Snapshot> {
        self.latest.as_ref()
    }

    /// Applies a client message at the current iteration boundary.
    pub fn handle(&mut self, message: ClientMessage) -> Vec<ServerMessage> {
        let t = self.t();
        let out = match &message {
            ClientMessage::ParamUpdate { patch, client_tag } => match self.state.update_params(patch) {
                Ok(()) => {
                    if self.state.is_finished() {
                        self.running = false;
                    }
                    let ack = Ack { client_tag: client_tag.clone(), applied_at_t: t, params: *self.params() };
                    vec![ServerMessage::Ack(ack), ServerMessage::Snapshot(self.snapshot())]
                }
                Err(e) => return vec![ServerMessage::invalid(&e, client_tag.clone())],
            },
            ClientMessage::Control { action, speed } => match action {
                ControlAction::Start | ControlAction::Resume => {
                    self.running = !self.state.is_finished();
                    Vec::new()
                }
                ControlAction::Pause => {
                    self.running = false;
                    vec![ServerMessage::Snapshot(self.snapshot())]
                }
                ControlAction::Reset => {
                    self.state = RunState::new(self.initial, self.seed).expect("initial parameters were valid");
                    self.running = false;
                    vec![ServerMessage::Snapshot(self.snapshot())]
                }
                ControlAction::SetSpeed => match speed {
                    Some(s) if s.is_finite() && *s > 0.0 => {
                        self.speed = Some(*s);
                        Vec::new()
                    }
                    _ => {
                        return vec![ServerMessage::error(ErrorCode::BadMessage, "set_speed needs a positive speed")]
                    }
                },
            },
        };
        self.log.push(LoggedEvent { t, message });
        out
    }

    /// Steps towards `target` (capped by the iteration budget), emitting a
    /// snapshot at every multiple of the cadence and one when the budget
    /// runs out. Reaching the budget pauses the session.
    pub fn advance_to(&mut self, target: u64) -> Vec<Snapshot> {
        let mut out = Vec::new();
        let every = self.config.snapshot_every;
        while self.t() < target && !self.state.is_finished() {
            self.state.step();
            let finished = self.state.is_finished();
            if finished {
                self.running = false;
            }
            if self.t().is_multiple_of(every) || finished {
                out.push(self.snapshot());
            }
        }
        out
    }

    /// Runs up to `max_iterations` if the session is running.
    pub fn tick(&mut self, max_iterations: u64) -> Vec<Snapshot> {
        if !self.running {
            return Vec::new();
        }
        self.advance_to(self.t().saturating_add(max_iterations))
    }

    /// Builds the next snapshot. Sampling draws from a stream derived from
    /// the session seed and the snapshot's `seq`.
    pub fn snapshot(&mut self) -> Snapshot {
        let g = self.state.graph();
        let cfg = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[self.seed, self.seq]));
        let (users, su) = metrics::node_subset(g, Modality::User, cfg.sample_threshold, cfg.sample_size, &mut rng);
        let (items, si) = metrics::node_subset(g, Modality::Item, cfg.sample_threshold, cfg.sample_size, &mut rng);
        let hu = analytics::degree_histogram(g, Modality::User);
        let hi = analytics::degree_histogram(g, Modality::Item);
        let (similar, neighbor_items) = metrics::neighborhood_sum_over(g, &users).means();
        let snap = Snapshot {
            format_version: REPORT_FORMAT.into(),
            seq: self.seq,
            t: self.state.t(),
            params: *self.state.params(),
            counts: Counts::of(g),
            histograms: Histograms {
                user: HistogramJson::truncated(&hu, cfg.histogram_bins),
                item: HistogramJson::truncated(&hi, cfg.histogram_bins),
            },
            blcc: BlccJson {
                user: metrics::blcc_sum_over(g, Modality::User, &users).into(),
                item: metrics::blcc_sum_over(g, Modality::Item, &items).into(),
            },
            neighborhood: NeighborhoodJson { mean_similar_users: similar, mean_neighbor_items: neighbor_items },
            fit: FitJson { user: fit_distribution_shape(&hu).ok(), item: fit_distribution_shape(&hi).ok() },
            sampled: su || si,
            state: RunFlags { running: self.running, finished: self.state.is_finished() },
            speed: self.speed,
        };
        self.seq += 1;
        self.latest = Some(snap.clone());
        snap
    }
}

/// Re-runs a session from its seed and event log, then advances to
/// `final_t`, returning every message it emits in order (the first is the
/// opening snapshot). Error replies are not logged, so none appear.
pub fn replay(
    params: GeneratorParams,
    seed: u64,
    config: SessionConfig,
    log: &[LoggedEvent],
    final_t: u64,
) -> Result<Vec<ServerMessage>, bigen_core::Error> {
    let (mut s, first) = Session::open(params, seed, config)?;
    let mut out = vec![ServerMessage::Snapshot(first)];
    for ev in log {
        out.extend(s.advance_to(ev.t).into_iter().map(ServerMessage::Snapshot));
        out.extend(s.handle(ev.message.clone()));
    }
    out.extend(s.advance_to(final_t).into_iter().map(ServerMessage::Snapshot));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bigen_core::ParamPatch;

    fn applet() -> GeneratorParams {
        GeneratorParams { m: 10, iterations: 1000, p: 0.5, u: 3, v: 3, alpha: 0.5, beta: 0.5, b: 0.5 }
    }

    fn control(action: ControlAction) -> ClientMessage {
        ClientMessage::Control { action, speed: None }
    }

    #[test]
    fn opens_paused_with_pairs() {
        let (s, snap) = Session::open(applet(), 1, SessionConfig::default()).unwrap();
        assert!(!s.is_running());
        assert_eq!((snap.seq, snap.t), (0, 0));
        assert_eq!(snap.counts, Counts { users: 10, items: 10, edges: 10 });
        assert_eq!(snap.histograms.user.degrees, vec![(1, 10)]);
        assert!(Session::open(GeneratorParams { p: 1.2, ..applet() }, 1, SessionConfig::default()).is_err());
    }

    #[test]
    fn cadence_and_invariants() {
        let cfg = SessionConfig { snapshot_every: 100, ..Default::default() };
        let (mut s, _) = Session::open(applet(), 2, cfg).unwrap();
        assert!(s.tick(500).is_empty());
        s.handle(control(ControlAction::Start));
        let mut snaps = Vec::new();
        while s.is_running() {
            snaps.extend(s.tick(37));
        }
        assert_eq!(snaps.len(), 10);
        assert!(snaps.windows(2).all(|w| w[0].seq < w[1].seq));
        for sn in &snaps {
            assert_eq!(sn.counts.users + sn.counts.items, 20 + sn.t as usize);
        }
        assert!(snaps.last().unwrap().state.finished);
    }

    #[test]
    fn update_acks_at_boundary() {
        let (mut s, _) = Session::open(applet(), 3, SessionConfig::default()).unwrap();
        s.handle(control(ControlAction::Start));
        s.tick(30);
        let patch = ParamPatch { alpha: Some(0.9), ..Default::default() };
        let out = s.handle(ClientMessage::ParamUpdate { patch, client_tag: Some("a".into()) });
        match &out[..] {
            [ServerMessage::Ack(a), ServerMessage::Snapshot(sn)] => {
                assert_eq!((a.applied_at_t, a.client_tag.as_deref(), a.params.alpha), (30, Some("a"), 0.9));
                assert_eq!(sn.params.alpha, 0.9);
            }
            other => panic!("{other:?}"),
        }
        let before = *s.params();
        let out = s.handle(ClientMessage::ParamUpdate {
            patch: ParamPatch { m: Some(5), ..Default::default() },
            client_tag: None,
        });
        assert!(matches!(&out[..], [ServerMessage::Error(e)] if e.field.as_deref() == Some("m")));
        assert_eq!(*s.params(), before);
        assert_eq!(s.log().len(), 2);
    }

    #[test]
    fn reset_restarts_stream() {
        let (mut s, first) = Session::open(applet(), 4, SessionConfig::default()).unwrap();
        s.handle(control(ControlAction::Start));
        let a = s.tick(200);
        s.handle(control(ControlAction::Reset));
        assert_eq!(s.t(), 0);
        assert_eq!(s.graph().edge_count(), first.counts.edges);
        s.handle(control(ControlAction::Start));
        let b = s.tick(200);
        assert_eq!(a.last().unwrap().counts, b.last().unwrap().counts);
        assert!(b[0].seq > a[1].seq);
    }

    #[test]
    fn replay_reproduces_messages() {
        let cfg = SessionConfig { snapshot_every: 50, ..Default::default() };
        let (mut s, first) = Session::open(applet(), 5, cfg).unwrap();
        let mut live = vec![ServerMessage::Snapshot(first)];
        let script: Vec<(u64, ClientMessage)> = vec![
            (0, control(ControlAction::Start)),
            (73, ClientMessage::ParamUpdate { patch: ParamPatch { b: Some(0.9), ..Default::default() }, client_tag: None }),
            (30, control(ControlAction::Pause)),
            (0, ClientMessage::Control { action: ControlAction::SetSpeed, speed: Some(10.0) }),
            (0, control(ControlAction::Resume)),
            (120, control(ControlAction::Reset)),
            (0, control(ControlAction::Start)),
            (90, control(ControlAction::Pause)),
        ];
        for (iters, msg) in script {
            let mut left = iters;
            while left > 0 {
                let n = left.min(17);
                live.extend(s.tick(n).into_iter().map(ServerMessage::Snapshot));
                left -= n;
            }
            live.extend(s.handle(msg));
        }
        let replayed = replay(applet(), 5, cfg, s.log(), s.t()).unwrap();
        assert_eq!(live, replayed);
    }
}
