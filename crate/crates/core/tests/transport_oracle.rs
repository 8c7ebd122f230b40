mod common;

#[test]
fn advection_diffusion_converges_at_first_order() {
    let errors: Vec<f64> = [4e-6, 2e-6, 1e-6].iter().map(|&dx| common::advection_diffusion_error(dx)).collect();
    for order in common::observed_orders(&errors) {
        assert!(order >= 0.8, "errors {errors:?}");
    }
}

#[test]
fn diffusion_matches_heat_kernel_under_refinement() {
    let errors: Vec<f64> = [2e-5, 1e-5, 5e-6].iter().map(|&dx| common::diffusion_error(dx)).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "errors {errors:?}");
    for order in common::observed_orders(&errors) {
        assert!(order >= 0.8, "errors {errors:?}");
    }
}

#[test]
fn mass_balance_closes_with_reaction() {
    let worst = common::worst_mass_balance(400);
    assert!(worst <= 1e-8, "worst residual {worst:e}");
}
