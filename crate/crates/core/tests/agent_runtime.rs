use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use adaptalearn::agents::{cyclic, one_shot, ticker, AclMessage, AgentError, AgentId, Clock, Flow, Performative, Platform};
use proptest::prelude::*;

fn secs(n: u64) -> Duration {
    Duration::from_secs(n)
}

fn counter() -> (Arc<AtomicUsize>, impl Fn() -> usize) {
    let c = Arc::new(AtomicUsize::new(0));
    let r = c.clone();
    (c, move || r.load(Ordering::SeqCst))
}

/// Registers a passive agent whose mailbox is read with `Platform::receive`.
fn mailbox(p: &Platform, name: &str) -> AgentId {
    p.spawn(name, vec![]).unwrap()
}

#[test]
fn spawn_registers_and_rejects_duplicates() {
    let p = Platform::new("platform", Clock::simulated());
    let id = mailbox(&p, "monitor");
    assert_eq!(id.guid(), "monitor@platform");
    assert_eq!(p.agents(), vec![id.clone()]);
    assert!(matches!(p.spawn("monitor", vec![]), Err(AgentError::DuplicateName(_))));
    assert!(p.kill(&id));
    assert!(p.agents().is_empty());
    p.spawn("monitor", vec![]).unwrap();
}

#[test]
fn ticker_period_5_fires_twice_in_12() {
    let p = Platform::new("p", Clock::simulated());
    let (c, count) = counter();
    p.spawn(
        "t",
        vec![ticker("tick", secs(5), move |_| {
            c.fetch_add(1, Ordering::SeqCst);
            Flow::Continue
        })],
    )
    .unwrap();
    assert_eq!(p.advance_clock(secs(12)).unwrap(), 2);
    assert_eq!(count(), 2);
    assert_eq!(p.now(), secs(12));
    // deadline 15 is 3 s away
    assert_eq!(p.advance_clock(secs(2)).unwrap(), 0);
    assert_eq!(p.advance_clock(secs(1)).unwrap(), 1);
}

#[test]
fn tickers_interleave_by_deadline() {
    let p = Platform::new("p", Clock::simulated());
    let log = Arc::new(Mutex::new(Vec::new()));
    for (name, period) in [("five", 5), ("three", 3)] {
        let log = log.clone();
        p.spawn(
            name,
            vec![ticker("t", secs(period), move |ctx| {
                log.lock().unwrap().push((ctx.now().as_secs(), ctx.aid().local_name));
                Flow::Continue
            })],
        )
        .unwrap();
    }
    assert_eq!(p.advance_clock(secs(15)).unwrap(), 8);
    let log = log.lock().unwrap();
    let names: Vec<_> = log.iter().map(|(t, n)| format!("{t}{}", &n[..1])).collect();
    // at t=15 both fire; spawn order breaks the tie
    assert_eq!(names, ["3t", "5f", "6t", "9t", "10f", "12t", "15f", "15t"]);
}

#[test]
fn wall_clock_cannot_be_advanced() {
    let p = Platform::new("p", Clock::wall());
    assert!(matches!(p.advance_clock(secs(1)), Err(AgentError::WallClock)));
}

#[test]
fn fifo_per_pair_and_sequence_numbers() {
    let p = Platform::new("p", Clock::simulated());
    let a = mailbox(&p, "a");
    let b = mailbox(&p, "b");
    let s1 = p.send(AclMessage::new(Performative::Inform, a.clone(), b.clone(), "m1")).unwrap();
    let s2 = p.send(AclMessage::new(Performative::Request, a.clone(), b.clone(), "m2")).unwrap();
    assert!(s1 < s2);
    assert_eq!(p.queue_len(&b), 2);
    assert_eq!(p.receive(&b, false).unwrap().content, "m1");
    assert_eq!(p.receive(&b, false).unwrap().content, "m2");
    assert!(p.receive(&b, false).is_none());
}

#[test]
fn unknown_receiver_bounces_failure() {
    let p = Platform::new("p", Clock::simulated());
    let a = mailbox(&p, "a");
    let ghost = p.agent_id("ghost");
    let err = p.send(AclMessage::new(Performative::Inform, a.clone(), ghost, "hi").with_conversation("c1")).unwrap_err();
    assert!(matches!(err, AgentError::Undeliverable { failure_seq: Some(1), .. }));
    let failure = p.receive(&a, false).unwrap();
    assert_eq!(failure.performative, Performative::Failure);
    assert_eq!(failure.sender.guid(), "ams@p");
    assert_eq!(failure.conversation_id, "c1");
    assert_eq!(p.sniffer_trace().len(), 1);
}

#[test]
fn gateway_send_requires_receiver_and_keeps_order() {
    let p = Platform::new("p", Clock::simulated());
    let m = p.agent_id("monitor");
    assert!(matches!(p.gateway_send(&m, "user_id=x"), Err(AgentError::UnknownAgent(_))));
    mailbox(&p, "monitor");
    p.gateway_send(&m, "one").unwrap();
    p.gateway_send(&m, "two").unwrap();
    let first = p.receive(&m, false).unwrap();
    assert_eq!((first.content.as_str(), first.sender.guid().as_str(), first.conversation_id.as_str()), ("one", "gateway@p", "gw-1"));
    assert_eq!(p.receive(&m, false).unwrap().content, "two");
}

#[test]
fn blocking_receive_wakes_on_send() {
    let p = Arc::new(Platform::new("p", Clock::simulated()));
    let a = mailbox(&p, "a");
    let b = mailbox(&p, "b");
    let waiter = {
        let p = p.clone();
        let b = b.clone();
        thread::spawn(move || p.receive(&b, true))
    };
    thread::sleep(Duration::from_millis(20));
    p.send(AclMessage::new(Performative::Inform, a, b.clone(), "wake")).unwrap();
    assert_eq!(waiter.join().unwrap().unwrap().content, "wake");
    assert!(p.receive_timeout(&b, Duration::from_millis(10)).is_none());
}

#[test]
fn cyclic_consumes_one_message_per_activation() {
    let p = Platform::new("p", Clock::simulated());
    let a = mailbox(&p, "a");
    let worker = p.spawn("w", vec![cyclic("eat", |_| Flow::Continue)]).unwrap();
    for i in 0..5 {
        p.send(AclMessage::new(Performative::Inform, a.clone(), worker.clone(), format!("m{i}"))).unwrap();
    }
    let mut sizes = vec![p.queue_len(&worker)];
    while p.step() {
        sizes.push(p.queue_len(&worker));
    }
    assert_eq!(sizes, [5, 4, 3, 2, 1, 0]);
}

#[test]
fn one_shot_runs_once_before_mail() {
    let p = Platform::new("p", Clock::simulated());
    let order = Arc::new(Mutex::new(Vec::new()));
    let (o1, o2) = (order.clone(), order.clone());
    let id = p
        .spawn(
            "x",
            vec![
                cyclic("mail", move |ctx| {
                    o1.lock().unwrap().push(ctx.take_message().unwrap().content);
                    Flow::Continue
                }),
                one_shot("setup", move |_| o2.lock().unwrap().push("setup".into())),
            ],
        )
        .unwrap();
    p.gateway_send(&id, "hello").unwrap();
    assert_eq!(p.run_until_idle(), 2);
    assert_eq!(p.run_until_idle(), 0);
    assert_eq!(*order.lock().unwrap(), ["setup", "hello"]);
}

#[test]
fn request_reply_trace_is_inform_then_confirm() {
    let p = Platform::new("p", Clock::simulated());
    let update = p
        .spawn(
            "update",
            vec![cyclic("ack", |ctx| {
                let m = ctx.take_message().unwrap();
                ctx.send(m.reply(Performative::Confirm, "ok")).unwrap();
                Flow::Continue
            })],
        )
        .unwrap();
    let monitor = mailbox(&p, "monitor");
    p.send(AclMessage::new(Performative::Inform, monitor, update, "change").with_conversation("c")).unwrap();
    p.run_until_idle();
    let trace = p.sniffer_trace();
    assert_eq!(trace.performatives(), [Performative::Inform, Performative::Confirm]);
    assert_eq!(trace.export(), "1 INFORM monitor@p -> update@p [c] change\n2 CONFIRM update@p -> monitor@p [c] ok\n");
    assert_eq!(p.sniffer_trace(), trace);
}

#[test]
fn empty_platform_has_empty_trace() {
    let p = Platform::new("p", Clock::simulated());
    assert!(p.sniffer_trace().is_empty());
    assert_eq!(p.sniffer_trace().export(), "");
}

/// A fixed scenario: a pinger ticks, a ponger answers, a third agent
/// sends to a ghost on every ping.
fn scenario(ticks: &[u64]) -> String {
    let p = Platform::new("det", Clock::simulated());
    p.spawn(
        "pong",
        vec![cyclic("answer", |ctx| {
            let m = ctx.take_message().unwrap();
            let _ = ctx.send(m.reply(Performative::Confirm, format!("re:{}", m.content)));
            Flow::Continue
        })],
    )
    .unwrap();
    let mut n = 0;
    p.spawn(
        "ping",
        vec![
            ticker("ping", secs(2), move |ctx| {
                n += 1;
                let to = ctx.agent_id("pong");
                let _ = ctx.send(AclMessage::new(Performative::Request, ctx.aid(), to, format!("n={n}")));
                let ghost = ctx.agent_id("ghost");
                let _ = ctx.send(AclMessage::new(Performative::Inform, ctx.aid(), ghost, "lost"));
                Flow::Continue
            }),
            cyclic("sink", |ctx| {
                ctx.take_message();
                Flow::Continue
            }),
        ],
    )
    .unwrap();
    for &t in ticks {
        p.advance_clock(secs(t)).unwrap();
    }
    p.sniffer_trace().export()
}

#[test]
fn simulated_runs_are_byte_identical() {
    let a = scenario(&[3, 4, 7, 1]);
    assert_eq!(a, scenario(&[3, 4, 7, 1]));
    assert_eq!(a.lines().count(), 7 * 3);
}

proptest! {
    #[test]
    fn killed_behavior_never_fires(kill_after in 1usize..5, floods in 1usize..20, advance in 1u64..50) {
        let p = Platform::new("p", Clock::simulated());
        let (c1, cyc) = counter();
        let (c2, tick) = counter();
        let id = p.spawn("k", vec![
            cyclic("c", move |_| {
                let n = c1.fetch_add(1, Ordering::SeqCst) + 1;
                if n >= kill_after { Flow::Kill } else { Flow::Continue }
            }),
            ticker("t", secs(1), move |_| {
                let n = c2.fetch_add(1, Ordering::SeqCst) + 1;
                if n >= kill_after { Flow::Kill } else { Flow::Continue }
            }),
        ]).unwrap();
        for _ in 0..kill_after + floods {
            p.gateway_send(&id, "x").unwrap();
        }
        p.advance_clock(secs(kill_after as u64 + advance)).unwrap();
        prop_assert_eq!(cyc(), kill_after);
        prop_assert_eq!(tick(), kill_after);
        // leftover mail stays queued because no cyclic behavior is alive
        prop_assert_eq!(p.queue_len(&id), floods);
    }

    #[test]
    fn every_send_is_delivered_or_bounced(targets in proptest::collection::vec(0usize..4, 0..40)) {
        let p = Platform::new("p", Clock::simulated());
        let names = ["a", "b", "c"];
        for n in names {
            p.spawn(n, vec![]).unwrap();
        }
        let sender = p.agent_id("a");
        let (mut ok, mut bounced) = (0, 0);
        for (i, t) in targets.iter().enumerate() {
            let to = p.agent_id(names.get(*t).copied().unwrap_or("ghost"));
            match p.send(AclMessage::new(Performative::Inform, sender.clone(), to, i.to_string())) {
                Ok(_) => ok += 1,
                Err(AgentError::Undeliverable { failure_seq: Some(_), .. }) => bounced += 1,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
        let trace = p.sniffer_trace();
        prop_assert_eq!(trace.len(), ok + bounced);
        let failures = trace.performatives().iter().filter(|p| **p == Performative::Failure).count();
        prop_assert_eq!(failures, bounced);
        let seqs: Vec<u64> = trace.messages.iter().map(|m| m.sequence_no).collect();
        prop_assert!(seqs.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(seqs, (1..=trace.len() as u64).collect::<Vec<_>>());
    }
}
