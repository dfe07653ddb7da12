// temporary calibration probe for the thin-wall fixture
use simstyle::control::ControlStrategy;
use simstyle::material::material_lookup;
use simstyle::pipeline::{run_pipeline, PipelineConfig};
use simstyle::schedule::{ScheduleConfig, ScheduleStrategy};
use simstyle::shapes;
use simstyle::simulate::{drop_test, element_to_vertex_stress, SimConfig};
use simstyle::stylize::StyleConfig;
use simstyle::tet::{build_correspondence, voxel_tetrahedralize};
use std::time::Instant;

fn main() {
    let mat = material_lookup("pla").unwrap();
    let mesh = shapes::thin_wall_model();
    let sigma_c = 0.2 * mat.yield_strength;
    println!("sigma_c = {:.3} MPa, yield = {:.1} MPa", sigma_c / 1e6, mat.yield_strength / 1e6);
    println!("verts = {}, diag = {:.4} m", mesh.vertex_count(), simstyle::mesh::bbox_diagonal(&mesh));

    // Baseline stress at a few drop heights.
    let tm = voxel_tetrahedralize(&mesh, shapes::FIXTURE_CELL).unwrap();
    println!("tets = {}", tm.tet_count());
    let corr = build_correspondence(&mesh, &tm);
    for h in [1.5, 4.0, 8.0] {
        let cfg = SimConfig { drop_height: h, duration: 0.018, ..Default::default() };
        let t0 = Instant::now();
        let sf = drop_test(&tm, &mat, &cfg).unwrap();
        let vm = element_to_vertex_stress(&sf, &tm, &corr).unwrap();
        let max = vm.iter().cloned().fold(0.0f64, f64::max);
        println!("h = {h}: baseline max = {:.3} MPa = {:.3} sigma_c ({:.1} s)",
                 max / 1e6, max / sigma_c, t0.elapsed().as_secs_f64());
    }

    // Unmasked (control=none) stylized outcome for several seeds/amplitudes.
    for amplitude in [0.02, 0.03] {
        for seed in [1u64, 2, 3, 4, 5] {
            let cfg = PipelineConfig {
                style: StyleConfig { seed, amplitude, frequency: 6.0, octaves: 3, iterations: 200, per_iter_cap: 0.01 },
                control: ControlStrategy::None,
                schedule: ScheduleConfig { strategy: ScheduleStrategy::Stress, ..Default::default() },
                sim: SimConfig { duration: 0.018, ..Default::default() },
                material: "pla".into(),
                voxel_size: Some(shapes::FIXTURE_CELL),
                safety_lambda: 0.2,
            };
            let t0 = Instant::now();
            match run_pipeline(&mesh, &cfg) {
                Ok((_, r)) => println!(
                    "A={amplitude} seed={seed}: none final max = {:.3} MPa = {:.3} sigma_c, sims={}, attain={:.3} ({:.0} s)",
                    r.max_stress_pa / 1e6, r.max_stress_pa / sigma_c, r.sim_count, r.style_attainment,
                    t0.elapsed().as_secs_f64()),
                Err(e) => println!("A={amplitude} seed={seed}: ERROR {e}"),
            }
        }
    }
}
