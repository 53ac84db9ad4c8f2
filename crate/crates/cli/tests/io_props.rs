use freechaos::io::{ChaosFile, KernelFile, StorageTag};
use freechaos_core::{ChaosElement, GridSpec, Kernel, Kind};
use proptest::prelude::*;

fn kernel() -> impl Strategy<Value = Kernel> {
    (1usize..=4, 0usize..=3, 0.5f64..4.0, any::<bool>()).prop_flat_map(
        |(cells, order, horizon, sparse)| {
            let len = cells.pow(order as u32);
            let value = prop_oneof![
                Just(0.0),
                -1e3f64..1e3,
                any::<f64>().prop_filter("finite", |v| v.is_finite())
            ];
            proptest::collection::vec(value, len).prop_map(move |mut values| {
                if sparse {
                    // keep a single entry so the kernel is stored sparsely
                    for v in values.iter_mut().skip(1) {
                        *v = 0.0;
                    }
                }
                let grid = GridSpec::new(horizon, cells).unwrap();
                Kernel::from_dense(grid, order, values).unwrap()
            })
        },
    )
}

proptest! {
    #[test]
    fn kernel_files_round_trip_bit_exact(k in kernel()) {
        let text = serde_json::to_string(&KernelFile::from_kernel(&k)).unwrap();
        let back: KernelFile = serde_json::from_str(&text).unwrap();
        let k2 = back.to_kernel().unwrap();
        prop_assert_eq!(k2.grid(), k.grid());
        for (a, b) in k.to_dense_values().iter().zip(k2.to_dense_values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn chaos_files_round_trip(parts in proptest::collection::vec(kernel(), 1..3), scalar in -10.0f64..10.0, poisson in any::<bool>()) {
        let grid = *parts[0].grid();
        let parts: Vec<Kernel> = parts
            .into_iter()
            .filter(|k| k.grid() == &grid && k.order() > 0)
            .fold(Vec::new(), |mut acc, k| {
                if !acc.iter().any(|a: &Kernel| a.order() == k.order()) {
                    acc.push(k);
                }
                acc
            });
        let kind = if poisson { Kind::FreePoisson } else { Kind::Wigner };
        let x = ChaosElement::from_parts(kind, grid, scalar, parts).unwrap();
        let text = serde_json::to_string_pretty(&ChaosFile::from_element(&x)).unwrap();
        let back: ChaosFile = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_element(Some(grid)).unwrap(), x);
    }
}

#[test]
fn sparse_storage_is_written_for_sparse_kernels() {
    let g = GridSpec::new(1.0, 32).unwrap();
    let k = Kernel::from_entries(g, 2, vec![(33, 2.0)]).unwrap();
    let f = KernelFile::from_kernel(&k);
    assert_eq!(f.storage, StorageTag::Sparse);
    let dense = Kernel::from_dense(g, 1, vec![1.0; 32]).unwrap();
    assert_eq!(KernelFile::from_kernel(&dense).storage, StorageTag::Dense);
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.json");
    let g = GridSpec::new(2.0, 2).unwrap();
    let k = Kernel::from_dense(g, 2, vec![0.1, 0.2, 0.2, 0.3]).unwrap();
    freechaos::io::write_json(&path, &KernelFile::from_kernel(&k)).unwrap();
    let back: KernelFile = freechaos::io::read_json(&path).unwrap();
    assert_eq!(back.to_kernel().unwrap(), k);
    let missing =
        freechaos::io::read_json::<KernelFile>(&dir.path().join("none.json")).unwrap_err();
    assert!(missing.to_string().contains("none.json"));
}
