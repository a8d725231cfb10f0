use std::sync::Arc;
use std::thread;
use std::time::Duration;

use adaptalearn::service::{EvaluationDimension, EventLogEntry, Service, ServiceConfig, ServiceError, SurveyResponse};
use adaptalearn::store::{self, ResourceKind};
use adaptalearn::style::{BehaviorEventKind, Dimension, IlsAnswerSheet, LearnerStyleProfile, Medium, SettleRule};

fn service() -> Service {
    Service::new(ServiceConfig { simulated_clock: true, admins: vec!["root".into()], ..ServiceConfig::default() }).unwrap()
}

/// Sheet answering A on every question of a positive dimension, B otherwise.
fn sheet(positive: [bool; 4]) -> IlsAnswerSheet {
    (0..44).map(|i| if positive[i % 4] { 'A' } else { 'B' }).collect::<String>().parse().unwrap()
}

fn learner(svc: &Service, id: &str, positive: [bool; 4]) -> adaptalearn::service::Session {
    svc.register(id, "pw", None).unwrap();
    let s = svc.login(id, "pw").unwrap();
    svc.submit_ils(&s, &sheet(positive)).unwrap();
    s
}

#[test]
fn register_login_logout() {
    let svc = service();
    assert_eq!(svc.register("monika123", "secret", Some("Monika")).unwrap(), "monika123");
    assert!(matches!(svc.register("monika123", "x", None), Err(ServiceError::Conflict(_))));
    assert!(matches!(svc.register("bad name", "x", None), Err(ServiceError::Validation(_))));
    assert!(matches!(svc.login("monika123", "wrong"), Err(ServiceError::BadCredentials)));
    assert!(matches!(svc.login("ghost", "secret"), Err(ServiceError::BadCredentials)));

    let s = svc.login("monika123", "secret").unwrap();
    assert_eq!(s.token.len(), 64);
    assert_eq!(svc.authenticate(&s.token).unwrap().user_id, "monika123");
    let monitor = svc.platform().agent_id("monitor-monika123");
    assert!(svc.platform().is_registered(&monitor));

    svc.logout(&s.token).unwrap();
    assert!(matches!(svc.authenticate(&s.token), Err(ServiceError::Unauthenticated)));
    assert!(!svc.platform().is_registered(&monitor));
    assert!(matches!(svc.logout(&s.token), Err(ServiceError::Unauthenticated)));
}

#[test]
fn monitor_survives_while_another_session_is_open() {
    let svc = service();
    svc.register("u", "pw", None).unwrap();
    let a = svc.login("u", "pw").unwrap();
    let b = svc.login("u", "pw").unwrap();
    assert_ne!(a.token, b.token);
    svc.logout(&a.token).unwrap();
    assert!(svc.platform().is_registered(&svc.platform().agent_id("monitor-u")));
    svc.logout(&b.token).unwrap();
    assert!(!svc.platform().is_registered(&svc.platform().agent_id("monitor-u")));
}

#[test]
fn sessions_expire() {
    let svc =
        Service::new(ServiceConfig { simulated_clock: true, session_ttl: Duration::from_secs(60), ..ServiceConfig::default() }).unwrap();
    svc.register("u", "pw", None).unwrap();
    let s = svc.login("u", "pw").unwrap();
    svc.advance(Duration::from_secs(59)).unwrap();
    assert!(svc.authenticate(&s.token).is_ok());
    svc.advance(Duration::from_secs(1)).unwrap();
    assert!(matches!(svc.authenticate(&s.token), Err(ServiceError::Unauthenticated)));
}

#[test]
fn admin_views() {
    let svc = service();
    svc.register("root", "pw", None).unwrap();
    let learner = learner(&svc, "monika123", [true; 4]);
    let admin = svc.login("root", "pw").unwrap();
    let guids: Vec<String> = svc.admin_agents(&admin).unwrap().iter().map(|a| a.guid()).collect();
    assert!(guids.contains(&"update@adaptalearn".to_string()));
    assert!(guids.contains(&"monitor-monika123@adaptalearn".to_string()));
    assert!(matches!(svc.admin_agents(&learner), Err(ServiceError::Forbidden)));
    assert!(matches!(svc.admin_trace(&learner), Err(ServiceError::Forbidden)));
    assert!(svc.admin_trace(&admin).unwrap().contains("user_id=monika123"));
}

#[test]
fn ils_creates_profile_with_zero_accumulators() {
    let svc = service();
    svc.register("monika123", "pw", Some("Monika")).unwrap();
    let s = svc.login("monika123", "pw").unwrap();
    assert!(matches!(svc.profile(&s), Err(ServiceError::ProfileRequired)));
    assert!(matches!(svc.get_page(&s, "cs101-variables"), Err(ServiceError::ProfileRequired)));
    let scores = svc.submit_ils(&s, &sheet([true, false, true, false])).unwrap();
    assert_eq!(scores.0.map(|s| s.value()), [11, -11, 11, -11]);
    let view = svc.profile(&s).unwrap();
    assert_eq!(view.accumulators.0, [0; 4]);
    let g = svc.user_store().snapshot();
    assert_eq!(store::learner_name(&g, "monika123").unwrap().local, "monika123");
    assert!(store::validate(&g, store::Schema::User).is_consistent());
}

#[test]
fn visual_learner_gets_video_and_text_toggle() {
    let svc = service();
    let s = learner(&svc, "v", [true, true, true, true]);
    let page = svc.get_page(&s, "cs101-variables").unwrap();
    assert_eq!(page.plan.primary_medium, Medium::Video);
    assert!(page.plan.offered_toggles.contains(&BehaviorEventKind::TextExplanation));
    let kinds: Vec<ResourceKind> = page.resources.iter().map(|r| r.kind).collect();
    assert_eq!(kinds, [ResourceKind::Video, ResourceKind::Quiz, ResourceKind::Challenge]);
    assert_eq!(page.alternates.len(), 1);
    assert_eq!(page.alternates[0].kind, ResourceKind::Text);
}

#[test]
fn reflexive_learner_has_no_challenges() {
    let svc = service();
    let s = learner(&svc, "r", [false, true, false, true]);
    let page = svc.get_page(&s, "cs101-variables").unwrap();
    assert!(page.resources.iter().all(|r| r.kind != ResourceKind::Challenge));
    assert!(page.plan.offered_toggles.contains(&BehaviorEventKind::ShowAllChallenges));
    let kinds: Vec<ResourceKind> = page.resources.iter().map(|r| r.kind).collect();
    assert_eq!(kinds, [ResourceKind::Text, ResourceKind::Quiz]);
}

#[test]
fn unknown_module_is_not_found() {
    let svc = service();
    let s = learner(&svc, "u", [true; 4]);
    assert!(matches!(svc.get_page(&s, "nope"), Err(ServiceError::NotFound(_))));
    assert!(matches!(svc.get_page(&s, "bad name"), Err(ServiceError::NotFound(_))));
}

#[test]
fn get_page_is_read_only() {
    let svc = service();
    let s = learner(&svc, "u", [true; 4]);
    let users = store::serialize(&svc.user_store().snapshot());
    let courses = store::serialize(&svc.course_store().snapshot());
    for m in svc.modules().unwrap() {
        svc.get_page(&s, &m.id).unwrap();
    }
    assert_eq!(store::serialize(&svc.user_store().snapshot()), users);
    assert_eq!(store::serialize(&svc.course_store().snapshot()), courses);
}

#[test]
fn modules_come_from_the_course_ontology() {
    let ids: Vec<String> = service().modules().unwrap().into_iter().map(|m| m.id).collect();
    assert_eq!(ids, ["cs101-loops", "cs101-variables", "ma201-limits"]);
}

#[test]
fn gallery_view_click_moves_sg_accumulator() {
    let svc = service();
    let s = learner(&svc, "monika123", [true; 4]);
    let out = svc.post_event(&s, BehaviorEventKind::GalleryView).unwrap();
    assert_eq!((out.dimension, out.delta, out.accumulator_after), (Dimension::SG, -2, -2));
    assert_eq!(svc.post_event(&s, BehaviorEventKind::GalleryView).unwrap().accumulator_after, -4);
    let lines = svc.event_log().lines();
    assert_eq!(
        lines,
        ["2024-01-01T00:00:00.000Z monika123 GalleryView SG -2 -2", "2024-01-01T00:00:00.000Z monika123 GalleryView SG -2 -4"]
    );
}

#[test]
fn event_without_profile_is_rejected_and_not_logged() {
    let svc = service();
    svc.register("u", "pw", None).unwrap();
    let s = svc.login("u", "pw").unwrap();
    assert!(matches!(svc.post_event(&s, BehaviorEventKind::WatchVideo), Err(ServiceError::ProfileRequired)));
    assert!(svc.event_log().lines().is_empty());
}

#[test]
fn concurrent_events_both_land() {
    let svc = Arc::new(service());
    let s = learner(&svc, "u", [true; 4]);
    let handles: Vec<_> = [BehaviorEventKind::HideChallenges, BehaviorEventKind::HideChallenges]
        .into_iter()
        .map(|k| {
            let svc = svc.clone();
            let s = s.clone();
            thread::spawn(move || svc.post_event(&s, k).unwrap())
        })
        .collect();
    let mut after: Vec<i32> = handles.into_iter().map(|h| h.join().unwrap().accumulator_after).collect();
    after.sort();
    assert_eq!(after, [-4, -2]);
    assert_eq!(svc.profile(&s).unwrap().accumulators.0, [-4, 0, 0, 0]);
}

#[test]
fn log_tracks_store_across_settles() {
    let svc = service();
    let s = learner(&svc, "u", [true; 4]);
    let kinds =
        [BehaviorEventKind::GalleryView, BehaviorEventKind::GalleryView, BehaviorEventKind::ShowAllQuizzes, BehaviorEventKind::GalleryView];
    for k in kinds {
        let out = svc.post_event(&s, k).unwrap();
        assert_eq!(out.accumulator_after, svc.profile(&s).unwrap().accumulators[k.dimension()]);
    }
    svc.advance(svc.config().adaptation.ticker_period).unwrap();
    let view = svc.profile(&s).unwrap();
    // SG reached -6: one settle from 11 to 9 with residual -1
    assert_eq!(view.scores.0.map(|s| s.value()), [11, 11, 11, 9]);
    assert_eq!(view.accumulators.0, [0, 2, 0, -1]);

    // fold the log from zero, then replay the CONFIRM residual rule
    let entries: Vec<EventLogEntry> = svc.event_log().entries().unwrap();
    let mut folded = [0i32; 4];
    for e in &entries {
        folded[e.dimension.index()] += e.delta;
        assert_eq!(folded[e.dimension.index()], e.accumulator_after);
    }
    let p = LearnerStyleProfile::from_raw("u", [11; 4], folded).unwrap();
    let (settled, _) = SettleRule::default().apply(&p).unwrap();
    assert_eq!(settled.raw_accumulators(), view.accumulators.0);
    assert!(svc.platform().sniffer_trace().export().contains("updated user=u SG:11->9"));
}

#[test]
fn survey_summary() {
    let svc = service();
    let summary = svc.survey_summary();
    assert!(summary.values().all(|v| v.mean().is_none()));
    assert_eq!(serde_json::to_value(&summary).unwrap()["Learner"], "no data");

    svc.survey_submit(SurveyResponse { respondent_id: "a".into(), scores: [3, 4, 5].into_iter().chain([5; 12]).collect() }).unwrap();
    svc.survey_submit(SurveyResponse { respondent_id: "b".into(), scores: [4; 15].to_vec() }).unwrap();
    let summary = svc.survey_summary();
    assert_eq!(summary[&EvaluationDimension::Learner].mean(), Some(4.0));
    assert_eq!(summary[&EvaluationDimension::Technology].mean(), Some(4.5));

    let bad = SurveyResponse { respondent_id: "c".into(), scores: [6; 15].to_vec() };
    assert!(matches!(svc.survey_submit(bad), Err(ServiceError::Validation(_))));
    let short = SurveyResponse { respondent_id: "c".into(), scores: [3; 14].to_vec() };
    assert!(matches!(svc.survey_submit(short), Err(ServiceError::Validation(_))));
}

#[test]
fn file_backed_state_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig { data_dir: Some(dir.path().to_path_buf()), simulated_clock: true, ..ServiceConfig::default() };
    {
        let svc = Service::new(config.clone()).unwrap();
        let s = learner(&svc, "monika123", [true; 4]);
        svc.post_event(&s, BehaviorEventKind::GalleryView).unwrap();
        svc.survey_submit(SurveyResponse { respondent_id: "a".into(), scores: vec![5; 15] }).unwrap();
    }
    let svc = Service::new(config).unwrap();
    let s = svc.login("monika123", "pw").unwrap();
    assert_eq!(svc.profile(&s).unwrap().accumulators.0, [0, 0, 0, -2]);
    assert_eq!(svc.event_log().lines().len(), 1);
    assert_eq!(svc.survey_summary()[&EvaluationDimension::Design].mean(), Some(5.0));
    assert!(matches!(svc.register("monika123", "pw", None), Err(ServiceError::Conflict(_))));

    let accounts = std::fs::read_to_string(dir.path().join("accounts.tsv")).unwrap();
    assert!(!accounts.contains("pw\t") && !accounts.contains("\tpw"));
    let log = std::fs::read_to_string(dir.path().join("events.log")).unwrap();
    assert_eq!(log, "2024-01-01T00:00:00.000Z monika123 GalleryView SG -2 -2\n");
    let users = std::fs::read_to_string(dir.path().join("user.owl.ttl")).unwrap();
    assert!(users.contains(":monika123 :changeSG \"-2\"^^xsd:integer ."));
}
