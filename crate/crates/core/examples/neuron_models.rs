//! One LIF neuron and the equivalent SNU cell driven by the same input.

use snnfc::neuron::{lif_step, LifParams, LifState, OutputActivation, SnuLayer, StateActivation};
use snnfc::neuron::snu_step;
use snnfc::Matrix;

fn main() {
    let (threshold, leak) = (1.0, 0.8);
    let mut lif = LifState::new(1, LifParams { threshold, leak_factor: leak, refractory: 0, resting: 0.0 });
    let snu = SnuLayer { weights: Matrix::from_vec(1, 1, vec![1.0]), leak, bias: vec![-threshold] };
    let (mut s, mut y) = (vec![0.0], vec![0.0]);

    let input = [0.3, 0.3, 0.3, 0.3, 0.0, 0.0, 0.6, 0.6, 0.0, 1.2, 0.1, 0.1];
    println!(" t  input  LIF v  LIF  SNU s  SNU");
    for (t, &x) in input.iter().enumerate() {
        let spk = lif_step(&mut lif, &[x])[0];
        (s, y) = snu_step(&snu, StateActivation::Relu, OutputActivation::Step, &[x], &s, &y);
        println!("{t:2}  {x:5.2}  {:5.2}  {:3}  {:5.2}  {:3}", lif.membrane[0], spk as u8, s[0], y[0]);
    }
}
