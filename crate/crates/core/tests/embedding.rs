use std::collections::{BTreeMap, BTreeSet};

use d3net::embedding::{cabinet_embedding, maintenance_view, partition_subnetworks, EmbeddingSpec, Removal};
use d3net::primitives::{schedule_all_to_all, schedule_one_to_all, PrimitiveOptions};
use d3net::sim::{run, verify_delivery, Schedule, SimConfig};
use d3net::topology::{wiring_plan, NetParams, RouterAddr};

fn net(k: u32, m: u32) -> NetParams {
    NetParams::new(k, m).unwrap()
}

/// Runs `schedule` natively on the logical network and translated on the
/// host, and checks the two runs are the same run under address renaming.
fn assert_equivalent(e: &EmbeddingSpec, schedule: &Schedule, expected: &[(RouterAddr, RouterAddr, u64)]) {
    let native = run(e.logical(), schedule, &SimConfig::strict()).unwrap();
    let hosted = run(e.host(), &e.translate_schedule(schedule).unwrap(), &SimConfig::strict()).unwrap();
    assert!(verify_delivery(&native, expected).ok);
    assert!(native.conflicts.is_empty());
    assert!(hosted.conflicts.is_empty());
    assert_eq!(native.rounds_launched, hosted.rounds_launched);
    assert_eq!(native.delay_rounds, hosted.delay_rounds);
    assert_eq!(native.total_steps, hosted.total_steps);
    assert_eq!(native.total_hops, hosted.total_hops);
    let rename = |d: &d3net::sim::Delivery| {
        (
            d.step,
            e.translate_addr(d.src).unwrap(),
            e.translate_addr(d.dst).unwrap(),
            d.tag,
            d.hops,
        )
    };
    let want: BTreeSet<_> = native.deliveries.iter().map(rename).collect();
    let got: BTreeSet<_> = hosted.deliveries.iter().map(|d| (d.step, d.src, d.dst, d.tag, d.hops)).collect();
    assert_eq!(want, got);
}

#[test]
fn all_to_all_runs_unchanged_on_four_of_nine_cabinets() {
    let host = net(9, 4);
    let e = cabinet_embedding(&host, &[1, 2, 5, 8]).unwrap();
    let plan = schedule_all_to_all(e.logical(), PrimitiveOptions::default()).unwrap();
    assert_eq!(plan.schedule.rounds(), 64);
    assert_eq!(plan.schedule.delays(), 16);
    assert_equivalent(&e, &plan.schedule, &plan.expected);
}

#[test]
fn smaller_wiring_is_a_subset_of_the_full_wiring() {
    let host = net(9, 4);
    let full: BTreeSet<_> = wiring_plan(&host).into_iter().collect();
    let e = cabinet_embedding(&host, &[1, 2, 5, 8]).unwrap();
    let part = e.wiring_plan();
    assert_eq!(part.len(), 4 * 4 * 4);
    assert!(part.iter().all(|b| full.contains(b)));
    // every global link of the small network rides one of those bundles
    let carried: BTreeSet<_> = part.iter().flat_map(|b| b.links()).collect();
    let globals: BTreeSet<_> = e.host_links().into_iter().filter(|l| l.is_global()).collect();
    assert_eq!(carried, globals);
}

#[test]
fn host_links_are_exactly_the_induced_subgraph() {
    for (kappa, lambda) in [(vec![1, 2, 5, 8], vec![0, 1, 2, 3]), (vec![0, 4], vec![1, 3])] {
        let e = d3net::embedding::build_embedding(&net(9, 4), &kappa, &lambda).unwrap();
        assert_eq!(e.host_links(), e.induced_links());
    }
}

#[test]
fn partitions_run_side_by_side_without_interference() {
    let host = net(8, 4);
    let parts = partition_subnetworks(&host, &[vec![0, 2, 4, 6], vec![1, 3, 5, 7]]).unwrap();
    let mut merged: BTreeMap<u32, d3net::sim::Slot> = BTreeMap::new();
    let mut expected = Vec::new();
    for e in &parts {
        let plan = schedule_all_to_all(e.logical(), PrimitiveOptions::default()).unwrap();
        for slot in e.translate_schedule(&plan.schedule).unwrap().slots {
            merged
                .entry(slot.step)
                .and_modify(|s| s.launches.extend(slot.launches.iter().cloned()))
                .or_insert(slot);
        }
        expected.extend(plan.expected.iter().map(|&(s, d, t)| {
            (e.translate_addr(s).unwrap(), e.translate_addr(d).unwrap(), t)
        }));
    }
    let schedule = Schedule {
        slots: merged.into_values().collect(),
    };
    let metrics = run(&host, &schedule, &SimConfig::strict()).unwrap();
    assert!(metrics.conflicts.is_empty());
    assert!(verify_delivery(&metrics, &expected).ok);
    assert_eq!(metrics.deliveries.len(), 2 * 64 * 64);

    assert!(partition_subnetworks(&host, &[vec![0, 1], vec![1, 2]]).is_err());
}

#[test]
fn maintenance_views_keep_working() {
    let host = net(3, 4);
    let e = maintenance_view(&host, Removal::Cabinet(1)).unwrap();
    assert_eq!(e.kappa(), [0, 2]);
    let plan = schedule_all_to_all(e.logical(), PrimitiveOptions::default()).unwrap();
    assert_equivalent(&e, &plan.schedule, &plan.expected);

    let host = net(2, 5);
    let e = maintenance_view(&host, Removal::LocalIndex(2)).unwrap();
    assert_eq!((e.logical().k(), e.logical().m()), (2, 4));
    assert_eq!(e.offline().len(), host.router_count() - 32);
    let plan = schedule_all_to_all(e.logical(), PrimitiveOptions::default()).unwrap();
    assert_equivalent(&e, &plan.schedule, &plan.expected);
    let root = RouterAddr::new(1, 0, 3);
    let plan = schedule_one_to_all(e.logical(), root, PrimitiveOptions::default()).unwrap();
    assert_equivalent(&e, &plan.schedule, &plan.expected);

    assert!(maintenance_view(&net(1, 4), Removal::Cabinet(0)).is_err());
    assert!(maintenance_view(&net(2, 2), Removal::LocalIndex(0)).is_err());
}

#[test]
fn table_round_trip_rejects_tampering() {
    let host = net(9, 4);
    let e = cabinet_embedding(&host, &[0, 3, 4, 6, 7]).unwrap();
    let mut rows = e.table();
    assert_eq!(rows[4].ports, [2, 5, 6, 8, 0]);
    assert!(EmbeddingSpec::from_table(&host, &rows).is_ok());
    rows[1].ports[3] = 1;
    assert!(EmbeddingSpec::from_table(&host, &rows).is_err());
}
