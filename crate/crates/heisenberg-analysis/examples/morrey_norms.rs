//! Morrey, weak Morrey, BMO and Campanato norm estimates over a ball family.

use heisenberg_analysis::hgroup::HBall;
use heisenberg_analysis::measure::{FunctionSpec, SampledFunction};
use heisenberg_analysis::potential::CriticalRadiusField;
use heisenberg_analysis::spaces::{bmo_norm, campanato_norm, morrey_norm, weak_morrey_norm, BallFamily, FamilyConfig, SpaceParams};

fn main() {
    let support = HBall::centered(1, 1.0).unwrap();
    let field = CriticalRadiusField::classical(1);
    let family = BallFamily::build(1, Some(&support), &FamilyConfig::default()).unwrap();
    let params = SpaceParams::morrey(2.0, 0.5, 0.0).classical();

    let chi = SampledFunction::indicator(support.clone());
    let strong = morrey_norm(&chi, &params, &family, &field).unwrap();
    let weak = weak_morrey_norm(&chi, &params, &family, &field).unwrap();
    println!("‖χ_B‖ strong {:.5} on B(c, {:.3}), weak {:.5}", strong.value, strong.maximizer.radius, weak.value);

    for a in [0.5, 2.0] {
        let v = morrey_norm(&chi.compose_dilation(a).unwrap(), &params, &family, &field).unwrap().value;
        println!("‖χ_B∘δ_{a}‖ / ‖χ_B‖ = {:.5}, a^(-Q(1-κ)/p) = {:.5}", v / strong.value, a.powf(-1.0));
    }

    let log = FunctionSpec::LogGauge { truncation: None }.build(1).unwrap();
    let bmo = bmo_norm(&log, 0.0, true, &family, &field).unwrap();
    println!("‖log|u|‖_BMO ≈ {:.5} (divergent: {})", bmo.value, bmo.divergent);

    let holder = FunctionSpec::GaugeHolder { beta: 0.5, truncation: None }.build(1).unwrap();
    let camp = campanato_norm(&holder, 0.5, 0.0, true, &family, &field).unwrap();
    println!("‖|u|^½‖ Campanato-½ ≈ {:.5}", camp.value);
}
