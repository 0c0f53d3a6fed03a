//! Event-driven simulation over a shared graphical representation.
//!
//! Each vertex carries a rate-1 recovery clock and `max_degree` transmission
//! slots of rate `λ_max`; slot `j` of `x` targets the `j`-th neighbour of
//! `x` when it exists and is void otherwise. Every transmission event also
//! carries a uniform mark `U`, and a layer with rate `λ` accepts it iff
//! `U < λ / λ_max`. Several layers (different `λ`, or induced subgraphs)
//! read the same realisation, which yields the monotone couplings.
//!
//! Only clocks at vertices infected in at least one layer can change any
//! layer, so events are drawn over that union: total rate
//! `|A| (1 + λ_max · max_degree)`, O(1) work per event plus O(layers).

use rand::Rng;

use super::{ContactError, SeedPath, TrialOutcome};
use crate::graph::{Graph, VertexId};
use crate::rng::{exponential, stream, StreamRole};

/// One coupled copy of the process.
#[derive(Clone, Debug)]
pub struct Layer {
    pub lambda: f64,
    /// Vertices the layer lives on; `None` means the whole graph.
    pub members: Option<Vec<VertexId>>,
    /// Initially infected vertices; `None` means full occupancy.
    pub initial: Option<Vec<VertexId>>,
}

impl Layer {
    pub fn full(lambda: f64) -> Self {
        Layer { lambda, members: None, initial: None }
    }

    pub fn induced(lambda: f64, members: Vec<VertexId>) -> Self {
        Layer { lambda, members: Some(members), initial: None }
    }
}

struct LayerState {
    lambda_ratio: f64,
    member: Option<Vec<bool>>,
    infected: Vec<bool>,
    count: usize,
    events: u64,
    tau: Option<f64>,
}

impl LayerState {
    #[inline]
    fn is_member(&self, v: VertexId) -> bool {
        self.member.as_ref().is_none_or(|m| m[v])
    }
}

/// Indexed set of vertices infected in at least one layer.
struct ActiveUnion {
    cover: Vec<u32>,
    list: Vec<VertexId>,
    pos: Vec<usize>,
}

impl ActiveUnion {
    fn new(nv: usize) -> Self {
        ActiveUnion { cover: vec![0; nv], list: Vec::new(), pos: vec![usize::MAX; nv] }
    }

    fn inc(&mut self, v: VertexId) {
        if self.cover[v] == 0 {
            self.pos[v] = self.list.len();
            self.list.push(v);
        }
        self.cover[v] += 1;
    }

    fn dec(&mut self, v: VertexId) {
        self.cover[v] -= 1;
        if self.cover[v] == 0 {
            let i = self.pos[v];
            let last = self.list.pop().expect("non-empty");
            if last != v {
                self.list[i] = last;
                self.pos[last] = i;
            }
            self.pos[v] = usize::MAX;
        }
    }
}

/// Run all layers on one realisation keyed by `seed_path`.
///
/// Returns one outcome per layer, in input order. Layers that survive past
/// `time_cap` are censored at the cap.
pub fn run_coupled(
    g: &Graph,
    layers: &[Layer],
    seed_path: SeedPath,
    time_cap: Option<f64>,
) -> Result<Vec<TrialOutcome>, ContactError> {
    let nv = g.vertex_count();
    if nv == 0 {
        return Err(ContactError::EmptyGraph);
    }
    if layers.is_empty() {
        return Err(ContactError::InvalidConfig("no layers to simulate".into()));
    }
    for l in layers {
        if !(l.lambda >= 0.0 && l.lambda.is_finite()) {
            return Err(ContactError::InvalidConfig(format!("infection rate {} must be finite and >= 0", l.lambda)));
        }
    }
    if let Some(cap) = time_cap {
        if !(cap > 0.0) {
            return Err(ContactError::InvalidConfig(format!("time cap {cap} must be positive")));
        }
    }
    let lambda_max = layers.iter().map(|l| l.lambda).fold(0.0, f64::max);
    let dmax = g.max_degree();

    let mut union = ActiveUnion::new(nv);
    let mut states = Vec::with_capacity(layers.len());
    for l in layers {
        let member = match &l.members {
            None => None,
            Some(vs) => {
                let mut m = vec![false; nv];
                for &v in vs {
                    *m.get_mut(v).ok_or(ContactError::UnknownVertex(v))? = true;
                }
                Some(m)
            }
        };
        let mut st = LayerState {
            lambda_ratio: if lambda_max > 0.0 { l.lambda / lambda_max } else { 0.0 },
            member,
            infected: vec![false; nv],
            count: 0,
            events: 0,
            tau: None,
        };
        let initial: Vec<VertexId> = match &l.initial {
            None => (0..nv).collect(),
            Some(vs) => vs.clone(),
        };
        for v in initial {
            if v >= nv {
                return Err(ContactError::UnknownVertex(v));
            }
            if st.is_member(v) && !st.infected[v] {
                st.infected[v] = true;
                st.count += 1;
                union.inc(v);
            }
        }
        if st.count == 0 {
            return Err(ContactError::EmptyInitialState);
        }
        states.push(st);
    }

    let mut rng = stream(seed_path.master, seed_path.trial, StreamRole::Contact);
    let per_vertex_rate = 1.0 + lambda_max * dmax as f64;
    let recovery_share = 1.0 / per_vertex_rate;
    let mut alive = states.len();
    let mut t = 0.0;
    while alive > 0 {
        let a = union.list.len();
        t += exponential(&mut rng, a as f64 * per_vertex_rate);
        if time_cap.is_some_and(|cap| t > cap) {
            break;
        }
        let x = union.list[rng.random_range(0..a)];
        if rng.random::<f64>() < recovery_share {
            for st in states.iter_mut() {
                if st.infected[x] {
                    st.infected[x] = false;
                    st.count -= 1;
                    st.events += 1;
                    union.dec(x);
                    if st.count == 0 {
                        st.tau = Some(t);
                        alive -= 1;
                    }
                }
            }
        } else {
            let slot = rng.random_range(0..dmax);
            let mark: f64 = rng.random();
            let Some(&y) = g.neighbors(x).get(slot) else { continue };
            for st in states.iter_mut() {
                if st.infected[x] && !st.infected[y] && mark < st.lambda_ratio && st.is_member(y) {
                    st.infected[y] = true;
                    st.count += 1;
                    st.events += 1;
                    union.inc(y);
                }
            }
        }
    }
    Ok(states
        .into_iter()
        .map(|st| match st.tau {
            Some(tau) => TrialOutcome { tau, censored: false, events: st.events, seed_path },
            None => TrialOutcome {
                tau: time_cap.expect("only a cap stops a live layer"),
                censored: true,
                events: st.events,
                seed_path,
            },
        })
        .collect())
}
