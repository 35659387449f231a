use std::path::Path;

use super::output::{csv_document, fmt_f64, fmt_opt, line_plot_svg, write_atomic};
use super::{AddNoiseArgs, CliError, CliResult, CompareArgs, DenoiseArgs, MetricsArgs, SpectrumArgs, SweepArgs};
use crate::baselines::{fft_log_magnitude, spatial_filter, FilterKind, KernelSpec};
use crate::envelope::{detect_base, EnvelopeEstimate};
use crate::image::{encode_png_gray, encode_pgm, read_image_file, ImageFormat};
use crate::metrics::{crucial_mask, energy_retention, psnr_roi, QualityReport};
use crate::noise::{awgn_apply, AwgnParams};
use crate::redistribute::{denoise, denoise_with_estimate, passthrough, DenoiseResult, RedistributionReport, Threshold};
use crate::{Error, GrayImage};

pub const REPORT_HEADER: &[&str] = &[
    "error_acc",
    "distributed",
    "leftover",
    "modified_pixels",
    "threshold",
    "no_envelope",
];

pub const SWEEP_HEADER: &[&str] = &[
    "t",
    "psnr_full_db",
    "psnr_roi_db",
    "ssim",
    "uiqi",
    "energy_retention",
    "error_acc",
    "distributed",
    "leftover",
    "modified_pixels",
];

pub const COMPARE_HEADER: &[&str] = &[
    "method",
    "mse",
    "psnr_db",
    "psnr_roi_db",
    "ssim",
    "uiqi",
    "energy_retention",
    "energy_retention_noisy",
    "no_envelope",
];

pub const METRICS_HEADER: &[&str] = &["mse", "psnr_db", "psnr_roi_db", "ssim", "uiqi", "energy_retention"];

fn load_gray(path: &Path) -> CliResult<GrayImage> {
    read_image_file(path)
        .map(|img| img.into_gray())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn output_format(path: &Path) -> CliResult<ImageFormat> {
    ImageFormat::from_path(path).ok_or_else(|| {
        CliError::Usage(format!(
            "{}: output extension must be .pgm, .pnm or .png",
            path.display()
        ))
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult {
    write_atomic(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn save_gray(path: &Path, img: &GrayImage, format: ImageFormat) -> CliResult {
    let bytes = match format {
        ImageFormat::Pgm => encode_pgm(img),
        ImageFormat::Png => encode_png_gray(img)?,
    };
    write_file(path, &bytes)
}

fn threshold(value: i64) -> CliResult<Threshold> {
    Ok(Threshold::new(value)?)
}

fn same_dims(a: &GrayImage, b: &GrayImage) -> CliResult {
    Ok(a.ensure_same_dims(b)?)
}

/// ROI-PSNR against `reference` over its pixels <= t; NaN for an empty region.
fn roi_psnr(reference: &GrayImage, candidate: &GrayImage, t: u8) -> CliResult<f64> {
    match crucial_mask(reference, t) {
        Ok(mask) => Ok(psnr_roi(reference, candidate, &mask)?),
        Err(Error::EmptyMask) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

fn retention(before: &GrayImage, after: &GrayImage) -> CliResult<f64> {
    match energy_retention(before, after) {
        Ok(r) => Ok(r),
        Err(Error::ZeroEnergyReference) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

fn report_row(r: &RedistributionReport) -> Vec<String> {
    vec![
        fmt_f64(r.error_acc),
        r.distributed.to_string(),
        fmt_f64(r.leftover),
        r.modified_pixels.to_string(),
        r.threshold.to_string(),
        r.no_envelope.to_string(),
    ]
}

pub fn cmd_add_noise(args: &AddNoiseArgs) -> CliResult {
    let format = output_format(&args.output)?;
    let seed = args.seed.unwrap_or_else(rand::random);
    let params = AwgnParams::new(args.sigma, args.mean, seed)?;
    let img = load_gray(&args.input)?;
    let noisy = awgn_apply(&img, &params);
    save_gray(&args.output, &noisy, format)?;
    println!("seed {seed}");
    Ok(())
}

pub fn cmd_denoise(args: &DenoiseArgs) -> CliResult {
    let t = threshold(args.threshold)?;
    let cfg = args.envelope.config()?;
    let format = output_format(&args.output)?;
    let noisy = load_gray(&args.input)?;
    let result = denoise(&noisy, t, &cfg)?;
    save_gray(&args.output, &result.output, format)?;
    if let Some(path) = &args.report {
        let doc = csv_document(REPORT_HEADER, &[report_row(&result.report)]);
        write_file(path, doc.as_bytes())?;
    }
    Ok(())
}

/// Parses a comma-separated list of strictly increasing thresholds.
pub fn parse_t_list(text: &str) -> CliResult<Vec<Threshold>> {
    let mut out: Vec<Threshold> = Vec::new();
    for item in text.split(',') {
        let value: i64 = item
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("invalid threshold '{item}'")))?;
        let t = threshold(value)?;
        if out.last().is_some_and(|&prev| prev >= t) {
            return Err(CliError::Usage(format!(
                "thresholds must be strictly increasing, got {} after {}",
                t.get(),
                out.last().unwrap().get()
            )));
        }
        out.push(t);
    }
    Ok(out)
}

fn run_threshold(noisy: &GrayImage, estimate: Option<&EnvelopeEstimate>, t: Threshold) -> CliResult<DenoiseResult> {
    Ok(match estimate {
        Some(est) => denoise_with_estimate(noisy, est.clone(), t)?,
        None => passthrough(noisy, t),
    })
}

fn detect(noisy: &GrayImage, cfg: &crate::envelope::SliceMatchConfig) -> CliResult<Option<EnvelopeEstimate>> {
    match detect_base(noisy, cfg) {
        Ok(est) => Ok(Some(est)),
        Err(Error::NoGaussianEnvelope) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult {
    let ts = parse_t_list(&args.t_list)?;
    let cfg = args.envelope.config()?;
    let noisy = load_gray(&args.input)?;
    let clean = load_gray(&args.clean)?;
    same_dims(&noisy, &clean)?;

    // detection does not depend on T
    let estimate = detect(&noisy, &cfg)?;
    let mut rows = Vec::with_capacity(ts.len());
    let mut points = Vec::with_capacity(ts.len());
    for t in ts {
        let result = run_threshold(&noisy, estimate.as_ref(), t)?;
        let q = QualityReport::compute(&clean, &result.output, None)?;
        let roi = roi_psnr(&clean, &result.output, t.get())?;
        let r = &result.report;
        points.push((f64::from(t.get()), roi));
        rows.push(vec![
            t.get().to_string(),
            fmt_f64(q.psnr_db),
            fmt_f64(roi),
            fmt_f64(q.ssim),
            fmt_f64(q.uiqi),
            fmt_f64(retention(&noisy, &result.output)?),
            fmt_f64(r.error_acc),
            r.distributed.to_string(),
            fmt_f64(r.leftover),
            r.modified_pixels.to_string(),
        ]);
    }
    write_file(&args.csv, csv_document(SWEEP_HEADER, &rows).as_bytes())?;
    if let Some(svg) = &args.svg {
        let doc = line_plot_svg("ROI PSNR vs threshold", "T", "ROI PSNR (dB)", &points);
        write_file(svg, doc.as_bytes())?;
    }
    Ok(())
}

fn compare_row(
    method: &str,
    clean: &GrayImage,
    noisy: &GrayImage,
    out: &GrayImage,
    t: Threshold,
    no_envelope: Option<bool>,
) -> CliResult<Vec<String>> {
    let q = QualityReport::compute(clean, out, None)?;
    Ok(vec![
        method.to_string(),
        fmt_f64(q.mse),
        fmt_f64(q.psnr_db),
        fmt_f64(roi_psnr(clean, out, t.get())?),
        fmt_f64(q.ssim),
        fmt_f64(q.uiqi),
        fmt_f64(q.energy_retention),
        fmt_f64(retention(noisy, out)?),
        no_envelope.map(|b| b.to_string()).unwrap_or_default(),
    ])
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult {
    let t = threshold(args.threshold)?;
    let cfg = args.envelope.config()?;
    let kinds: Vec<FilterKind> = match args.filter.as_str() {
        "all" => vec![FilterKind::Mean, FilterKind::Median, FilterKind::Gaussian],
        other => vec![other.parse()?],
    };
    let specs = kinds
        .into_iter()
        .map(|k| KernelSpec::new(k, args.ksize, args.fsigma))
        .collect::<Result<Vec<_>, _>>()?;
    let noisy = load_gray(&args.input)?;
    let clean = load_gray(&args.clean)?;
    same_dims(&noisy, &clean)?;

    let selective = denoise(&noisy, t, &cfg)?;
    let mut rows = vec![compare_row(
        "selective",
        &clean,
        &noisy,
        &selective.output,
        t,
        Some(selective.report.no_envelope),
    )?];
    for spec in specs {
        let filtered = spatial_filter(&noisy, &spec)?;
        let name = format!("{}{}", spec.kind(), spec.size());
        rows.push(compare_row(&name, &clean, &noisy, &filtered, t, None)?);
    }
    write_file(&args.csv, csv_document(COMPARE_HEADER, &rows).as_bytes())
}

pub fn cmd_metrics(args: &MetricsArgs) -> CliResult {
    let t = args.threshold.map(threshold).transpose()?;
    let reference = load_gray(&args.clean)?;
    let candidate = load_gray(&args.input)?;
    same_dims(&reference, &candidate)?;
    let q = QualityReport::compute(&reference, &candidate, None)?;
    let roi = t.map(|t| roi_psnr(&reference, &candidate, t.get())).transpose()?;
    let row = vec![
        fmt_f64(q.mse),
        fmt_f64(q.psnr_db),
        fmt_opt(roi),
        fmt_f64(q.ssim),
        fmt_f64(q.uiqi),
        fmt_f64(q.energy_retention),
    ];
    let doc = csv_document(METRICS_HEADER, &[row]);
    match &args.csv {
        Some(path) => write_file(path, doc.as_bytes()),
        None => {
            print!("{doc}");
            Ok(())
        }
    }
}

/// Path of the text file holding the spectrum's pre-rescale range.
pub fn spectrum_sidecar(out: &Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".range.txt");
    name.into()
}

pub fn cmd_spectrum(args: &SpectrumArgs) -> CliResult {
    let format = output_format(&args.output)?;
    let img = load_gray(&args.input)?;
    let view = fft_log_magnitude(&img);
    save_gray(&args.output, &view.image, format)?;
    let sidecar = format!("log_min {:?}\nlog_max {:?}\n", view.log_min, view.log_max);
    write_file(&spectrum_sidecar(&args.output), sidecar.as_bytes())
}
