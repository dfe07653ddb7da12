//! Parallel-versus-sequential benchmarks for the data-parallel hot paths:
//! drop-test force assembly, correspondence matching, and thickness.
//!
//! With the default `parallel` feature the suite additionally runs each case
//! inside a 1-thread rayon pool, so one `cargo bench` invocation compares the
//! work-stealing and serialized executions. Building the bench with
//! `--no-default-features` exercises the true sequential fallback paths.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use simstyle::material::material_lookup;
use simstyle::shapes;
use simstyle::simulate::{drop_test, SimConfig};
use simstyle::stylize::{style_field, StyleConfig};
use simstyle::tet::{build_correspondence, voxel_tetrahedralize};
use simstyle::thickness::local_thickness;

fn sim_config() -> SimConfig {
    SimConfig {
        duration: 0.0005,
        ..Default::default()
    }
}

fn bench_case(c: &mut Criterion, label: &str, f: &dyn Fn()) {
    #[cfg(feature = "parallel")]
    let threads = {
        let n = std::thread::available_parallelism().map_or(4, |p| p.get());
        vec![1usize, n]
    };
    #[cfg(not(feature = "parallel"))]
    let threads = vec![1usize];

    let mut group = c.benchmark_group(label);
    group.sample_size(10);
    for &t in &threads {
        group.bench_with_input(BenchmarkId::from_parameter(t), &t, |b, &_t| {
            #[cfg(feature = "parallel")]
            {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(_t)
                    .build()
                    .unwrap();
                b.iter(|| pool.install(f));
            }
            #[cfg(not(feature = "parallel"))]
            b.iter(f);
        });
    }
    group.finish();
}

fn benches(c: &mut Criterion) {
    let mat = material_lookup("pla").unwrap();
    let wall = shapes::thin_wall_model();
    let tm = voxel_tetrahedralize(&wall, shapes::FIXTURE_CELL).unwrap();
    let cfg = sim_config();

    bench_case(c, "drop_test_thin_wall", &|| {
        drop_test(&tm, &mat, &cfg).unwrap();
    });

    let sphere = shapes::icosphere(0.05, 4);
    let sphere_tm = voxel_tetrahedralize(&sphere, 0.1 / 24.0).unwrap();
    bench_case(c, "correspondence_sphere", &|| {
        build_correspondence(&sphere, &sphere_tm);
    });

    bench_case(c, "thickness_thin_wall", &|| {
        local_thickness(&wall).unwrap();
    });

    let style = StyleConfig::default();
    bench_case(c, "style_field_sphere", &|| {
        style_field(&sphere, &style).unwrap();
    });
}

criterion_group!(par_vs_seq, benches);
criterion_main!(par_vs_seq);
