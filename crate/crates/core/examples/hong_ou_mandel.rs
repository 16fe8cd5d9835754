//! Two identical photons on a 50:50 beam splitter never leave through
//! different ports; orthogonally polarized photons do half the time.
//!
//! cargo run --example hong_ou_mandel

use spe_amp::elements::OpticalElement;
use spe_amp::fock::{register_modes, Polarization, PureState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reg = register_modes(&["in1", "in2", "out1", "out2"])?;
    let bs = OpticalElement::bs50("in1", "in2", "out1", "out2");
    println!("{bs}");
    let m = bs.single_photon_matrix();
    println!(
        "unitarity defect of the transfer matrix: {:.3e}",
        m.unitarity_defect()
    );

    let out1 = (
        reg.slot("out1", Polarization::H)?,
        reg.slot("out1", Polarization::V)?,
    );
    let out2 = (
        reg.slot("out2", Polarization::H)?,
        reg.slot("out2", Polarization::V)?,
    );

    for (label, second) in [
        ("parallel", Polarization::H),
        ("orthogonal", Polarization::V),
    ] {
        let input = PureState::vacuum(&reg)
            .create_photon("in1", Polarization::H)?
            .create_photon("in2", second)?;
        let out = bs.apply(&input)?;
        let coincidence: f64 = out
            .terms()
            .filter(|(ket, _)| {
                let c = ket.counts();
                c[out1.0] + c[out1.1] == 1 && c[out2.0] + c[out2.1] == 1
            })
            .fold(0.0, |acc, (_, a)| acc + a.norm_sqr());
        println!("\n{label} polarizations, coincidence probability {coincidence:.3e}");
        print!("{out}");
    }
    Ok(())
}
