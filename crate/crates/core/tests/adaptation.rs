use std::sync::Arc;
use std::time::Duration;

use adaptalearn::adaptation::{
    monitor_on_gateway_message, spawn_monitor, spawn_update, update_on_inform, AdaptationConfig, DimChangeNotice, MonitorPhase,
    MonitorState,
};
use adaptalearn::agents::{AclMessage, Clock, Performative, Platform};
use adaptalearn::store::{self, KnowledgeStore, TripleGraph};
use adaptalearn::style::{Dimension, LearnerStyleProfile, SettleRule};
use proptest::prelude::*;

const USERS: &str = include_str!("../fixtures/user.owl.ttl");
const PERIOD: Duration = Duration::from_secs(30);

fn users() -> TripleGraph {
    store::parse(USERS).unwrap()
}

fn with_profile(id: &str, scores: [i32; 4], accs: [i32; 4]) -> TripleGraph {
    let mut g = users();
    store::ensure_learner(&mut g, id, id).unwrap();
    store::write_profile(&mut g, &LearnerStyleProfile::from_raw(id, scores, accs).unwrap()).unwrap();
    g
}

struct Rig {
    platform: Platform,
    store: Arc<KnowledgeStore>,
}

fn rig(graph: TripleGraph, user: &str) -> Rig {
    let platform = Platform::new("platform", Clock::simulated());
    let store = Arc::new(KnowledgeStore::in_memory(graph));
    let config = AdaptationConfig::default();
    spawn_update(&platform, store.clone(), config).unwrap();
    let (monitor, _) = spawn_monitor(&platform, store.clone(), config, &format!("monitor-{user}")).unwrap();
    platform.gateway_send(&monitor, format!("user_id={user}")).unwrap();
    platform.run_until_idle();
    Rig { platform, store }
}

fn profile(r: &Rig, id: &str) -> ([i32; 4], [i32; 4]) {
    let p = store::read_profile(&r.store.snapshot(), id).unwrap();
    (p.raw_scores(), p.raw_accumulators())
}

#[test]
fn one_tick_settles_monika() {
    let r = rig(users(), "monika123");
    assert_eq!(r.platform.advance_clock(PERIOD).unwrap(), 1);
    assert_eq!(
        r.platform.sniffer_trace().export(),
        "1 INFORM gateway@platform -> monitor-monika123@platform [gw-1] user_id=monika123\n\
         2 INFORM monitor-monika123@platform -> update@platform [dims-monika123-1] update-dims user=monika123 SG=-5\n\
         3 CONFIRM update@platform -> monitor-monika123@platform [dims-monika123-1] updated user=monika123 SG:1->-1\n"
    );
    assert_eq!(profile(&r, "monika123"), ([1, 3, -1, -1], [0, 4, 0, 0]));

    // only monika's triples changed
    let before = users();
    let after = r.store.snapshot();
    let changed: Vec<_> = before.iter().filter(|t| !after.contains(t)).chain(after.iter().filter(|t| !before.contains(t))).collect();
    assert_eq!(changed.len(), 4);
    assert!(changed.iter().all(|t| t.subject.local == "monika123"));

    // quiet afterwards
    r.platform.advance_clock(PERIOD * 3).unwrap();
    assert_eq!(r.platform.sniffer_trace().len(), 3);
}

#[test]
fn below_threshold_sends_nothing() {
    let r = rig(with_profile("quiet", [1, 1, 1, 1], [0, 4, 0, -4]), "quiet");
    r.platform.advance_clock(PERIOD * 2).unwrap();
    assert_eq!(r.platform.sniffer_trace().len(), 1);
}

#[test]
fn row_two_batches_three_dimensions() {
    let r = rig(with_profile("row2", [1, 1, -1, 1], [-7, -6, 3, -8]), "row2");
    r.platform.advance_clock(PERIOD).unwrap();
    let trace = r.platform.sniffer_trace();
    assert_eq!(trace.messages[1].content, "update-dims user=row2 AR=-7 SI=-6 SG=-8");
    assert_eq!(trace.messages[2].content, "updated user=row2 AR:1->-1 SI:1->-1 SG:1->-1");
    assert_eq!(profile(&r, "row2"), ([-1, -1, -1, -1], [-2, -1, 3, -3]));
}

#[test]
fn missing_learner_sends_no_inform() {
    let r = rig(users(), "nobody");
    r.platform.advance_clock(PERIOD * 2).unwrap();
    assert_eq!(r.platform.sniffer_trace().len(), 1);
}

#[test]
fn gateway_transitions() {
    let mut st = MonitorState::new(PERIOD);
    assert!(!monitor_on_gateway_message(&mut st, "garbage"));
    assert!(!monitor_on_gateway_message(&mut st, "user_id="));
    assert_eq!(st.phase, MonitorPhase::AwaitingUserId);
    assert!(monitor_on_gateway_message(&mut st, "user_id=monika123"));
    assert!(!monitor_on_gateway_message(&mut st, "user_id=riju7"));
    assert_eq!(st.phase, MonitorPhase::Active("monika123".into()));
}

#[test]
fn monitor_waits_for_a_valid_user_id() {
    let platform = Platform::new("platform", Clock::simulated());
    let store = Arc::new(KnowledgeStore::in_memory(users()));
    let config = AdaptationConfig::default();
    spawn_update(&platform, store.clone(), config).unwrap();
    let (m, state) = spawn_monitor(&platform, store, config, "monitor-x").unwrap();
    platform.gateway_send(&m, "garbage").unwrap();
    platform.run_until_idle();
    // no ticker yet
    assert_eq!(platform.advance_clock(PERIOD * 2).unwrap(), 0);
    platform.gateway_send(&m, "user_id=monika123").unwrap();
    platform.gateway_send(&m, "user_id=riju7").unwrap();
    platform.run_until_idle();
    assert_eq!(state.lock().unwrap().user_id(), Some("monika123"));
    assert_eq!(platform.advance_clock(PERIOD).unwrap(), 1);
    assert!(platform.sniffer_trace().export().contains("update-dims user=monika123 SG=-5"));
    assert_eq!(state.lock().unwrap().notices_sent, 1);
}

#[test]
fn malformed_inform_gets_failure() {
    let platform = Platform::new("platform", Clock::simulated());
    let store = Arc::new(KnowledgeStore::in_memory(users()));
    let update = spawn_update(&platform, store, AdaptationConfig::default()).unwrap();
    let probe = platform.spawn("probe", vec![]).unwrap();
    for content in ["hello", "update-dims user=monika123", "update-dims user=monika123 SG=x", "update-dims user=monika123 SG=-5 AR=5"] {
        platform.send(AclMessage::new(Performative::Inform, probe.clone(), update.clone(), content)).unwrap();
        platform.run_until_idle();
        let reply = platform.receive(&probe, false).unwrap();
        assert_eq!(reply.performative, Performative::Failure, "{content}");
    }
}

#[test]
fn unknown_learner_in_notice_gets_failure() {
    let platform = Platform::new("platform", Clock::simulated());
    let store = Arc::new(KnowledgeStore::in_memory(users()));
    let update = spawn_update(&platform, store, AdaptationConfig::default()).unwrap();
    let probe = platform.spawn("probe", vec![]).unwrap();
    platform.send(AclMessage::new(Performative::Inform, probe.clone(), update, "update-dims user=ghost SG=-5")).unwrap();
    platform.run_until_idle();
    let reply = platform.receive(&probe, false).unwrap();
    assert_eq!(reply.performative, Performative::Failure);
    assert!(reply.content.starts_with("failed user=ghost reason="), "{}", reply.content);
}

#[test]
fn failed_write_replies_failure_and_keeps_profile() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub").join("user.owl.ttl");
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    let store = Arc::new(KnowledgeStore::open(&path, users).unwrap());
    std::fs::remove_dir_all(path.parent().unwrap()).unwrap();

    let platform = Platform::new("platform", Clock::simulated());
    let config = AdaptationConfig::default();
    spawn_update(&platform, store.clone(), config).unwrap();
    let (m, _) = spawn_monitor(&platform, store.clone(), config, "monitor-monika123").unwrap();
    platform.gateway_send(&m, "user_id=monika123").unwrap();
    platform.advance_clock(PERIOD).unwrap();
    let trace = platform.sniffer_trace();
    assert_eq!(trace.performatives(), [Performative::Inform, Performative::Inform, Performative::Failure]);
    let p = store::read_profile(&store.snapshot(), "monika123").unwrap();
    assert_eq!(p.raw_accumulators(), [0, 4, 0, -5]);
}

#[test]
fn racing_notice_is_a_no_op() {
    let store = KnowledgeStore::in_memory(users());
    let notice: DimChangeNotice = "update-dims user=monika123 SG=-5".parse().unwrap();
    let rule = SettleRule::default();
    let first = update_on_inform(&store, &notice, &rule).unwrap();
    assert_eq!(first.len(), 1);
    assert_eq!(first[0].dimension, Dimension::SG);
    let before = store::serialize(&store.snapshot());
    assert!(update_on_inform(&store, &notice, &rule).unwrap().is_empty());
    assert_eq!(store::serialize(&store.snapshot()), before);
}

fn acc() -> impl Strategy<Value = i32> {
    -20i32..=20
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tick_leaves_accumulators_below_threshold(
        scores in proptest::array::uniform4((-5i32..=5).prop_map(|k| 2 * k + 1)),
        accs in proptest::array::uniform4(acc()),
    ) {
        let r = rig(with_profile("p", scores, accs), "p");
        r.platform.advance_clock(PERIOD).unwrap();
        let (_, after) = profile(&r, "p");
        prop_assert!(after.iter().all(|a| a.abs() < 5), "{:?}", after);
        let informs = r.platform.sniffer_trace().messages.iter()
            .filter(|m| m.performative == Performative::Inform && m.sender.local_name.starts_with("monitor"))
            .count();
        let expected = usize::from(accs.iter().any(|a| a.abs() >= 5));
        prop_assert_eq!(informs, expected);
    }
}
