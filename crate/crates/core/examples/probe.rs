use cone_lab_core::*;
fn main() {
    use cone_lab_core::boundary::BoundarySpectrum;
    use cone_lab_core::conormal::{conormal_symbol, invert_conormal};
    use cone_lab_core::operator::ConeOperator;
    use cone_lab_core::mellin::*;
    let spec = BoundarySpectrum::point();
    let inv = invert_conormal(&conormal_symbol(&ConeOperator::laplacian(0), &spec).unwrap()).unwrap();
    let u = RadialFunction::exact(ExactProfile::Bump { lo: 0.5, hi: 2.0 }, vec![Complex::new(1.0, 0.0)]);
    let vals = green_action_contour_oracle(&inv, 0, 0.75, 1.25, &u, &[0.05, 0.1]).unwrap();
    for row in &vals { for v in row { println!("residual {:e}", v.norm()); } }
    // check Mellin decay of the bump at big imaginary parts
    for y in [10.0, 20.0, 30.0, 40.0] {
        let m = mellin_transform(&u, 0, Complex::new(-0.5, y), 0).unwrap();
        println!("Mu(-0.5+{}i) = {:e}", y, m.norm());
    }
}
