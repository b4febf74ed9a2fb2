use flexgrid::tuner::PartitionSpec;
use flexgrid::workload::{
    gen_initial, gen_trace, replay, LiveSet, RecordKind, TraceOp, WorkloadSpec,
};
use flexgrid::{IndexVariant, Point, QueryBox, RepartitionConfig, VariantKind};

fn spec() -> WorkloadSpec {
    WorkloadSpec {
        dims: 2,
        initial: 500,
        queries: 6000,
        block: 200,
        seed: 21,
        ..WorkloadSpec::default()
    }
}

fn run(kind: VariantKind) -> (Vec<(usize, u64)>, Vec<usize>) {
    let w = spec();
    let initial = gen_initial(&w).unwrap();
    let trace = gen_trace(&w).unwrap();
    let p = PartitionSpec::new(1, vec![5, 1]).unwrap();
    let mut index =
        IndexVariant::build(kind, 2, initial.clone(), &p, RepartitionConfig::default()).unwrap();
    let mut live = LiveSet::from_points(initial);
    let log = replay(&trace, &mut index, &mut live, 77).unwrap();
    assert_eq!(live.len(), index.len());
    (
        log.search_digests(),
        log.records.iter().map(|r| r.len_after).collect(),
    )
}

#[test]
fn membership_trajectory_is_deterministic() {
    let a = run(VariantKind::Flexflood);
    assert_eq!(a, run(VariantKind::Flexflood));
    // every variant sees the same erase choices and the same results
    assert_eq!(a, run(VariantKind::UpdatableFlood));
    assert_eq!(a, run(VariantKind::DeltaBuffer { k: 200 }));
}

#[test]
fn erase_on_empty_index_is_skipped() {
    let p = PartitionSpec::uniform(2, 1, 1).unwrap();
    let mut index = IndexVariant::build(
        VariantKind::Flexflood,
        2,
        Vec::<Point>::new(),
        &p,
        RepartitionConfig::default(),
    )
    .unwrap();
    let trace = vec![
        TraceOp::EraseRandomLive,
        TraceOp::Insert(Point::new(vec![1.0, 2.0]).unwrap()),
        TraceOp::EraseRandomLive,
        TraceOp::EraseRandomLive,
        TraceOp::Search(QueryBox::from_coords(&[0.0, 0.0], &[5.0, 5.0]).unwrap()),
    ];
    let mut live = LiveSet::new();
    let log = replay(&trace, &mut index, &mut live, 1).unwrap();
    assert_eq!(log.skipped_erases, 2);
    let kinds: Vec<RecordKind> = log.records.iter().map(|r| r.kind).collect();
    assert_eq!(
        kinds,
        [
            RecordKind::SkippedErase,
            RecordKind::Insert,
            RecordKind::Erase,
            RecordKind::SkippedErase,
            RecordKind::Search
        ]
    );
    assert_eq!(log.search_digests(), vec![(0, 0)]);
}
