//! Samples Nakagami-m fading and compares the empirical power moments with
//! the unit-power Gamma law.

use phasequant::channel::{nakagami_magnitude_pdf, sample_noise, FadingSpec, StreamFactory};

fn main() -> phasequant::Result<()> {
    let streams = StreamFactory::new(2024);
    let n = 200_000;
    for (id, m) in [0.5, 1.0, 2.0, 5.0].into_iter().enumerate() {
        let spec = FadingSpec::new(m)?;
        let mut rng = streams.stream(id as u64);
        let power: Vec<f64> = (0..n).map(|_| spec.sample(&mut rng).norm_sqr()).collect();
        let mean = power.iter().sum::<f64>() / n as f64;
        let var = power.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / n as f64;
        println!(
            "m = {m}: E|h|^2 = {mean:.4}, Var|h|^2 = {var:.4} (expect {:.4}), pdf(1) = {:.4}",
            1.0 / m,
            nakagami_magnitude_pdf(1.0, m)?
        );
    }

    let mut rng = streams.stream(99);
    let noise_power = (0..n).map(|_| sample_noise(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
    println!("noise E|w|^2 = {noise_power:.4}");
    Ok(())
}
