#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stn/analysis.hpp"
#include "stn/fitting.hpp"
#include "stn/losses.hpp"
#include "stn/model.hpp"
#include "stn/resample.hpp"
#include "stn/synth.hpp"
#include "stn/wav.hpp"

namespace py = pybind11;

namespace {

stn::AudioBuffer to_buffer(const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
                           int sample_rate) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-D array");
  stn::AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.assign(a.data(), a.data() + a.size());
  return out;
}

py::array_t<double> to_array(const stn::AudioBuffer& b) {
  py::array_t<double> out(static_cast<py::ssize_t>(b.samples.size()));
  std::copy(b.samples.begin(), b.samples.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral-modeling piano synthesis core";
  m.attr("MODEL_RATE") = stn::kModelRate;
  m.attr("TRANSIENT_LENGTH") = stn::kTransientLength;

  py::class_<stn::DampingCoeffs>(m, "DampingCoeffs")
      .def(py::init<>())
      .def(py::init([](double b0, double b1, double b2, double b3) {
             return stn::DampingCoeffs{b0, b1, b2, b3};
           }),
           py::arg("b0"), py::arg("b1"), py::arg("b2"), py::arg("b3"))
      .def_readwrite("b0", &stn::DampingCoeffs::b0)
      .def_readwrite("b1", &stn::DampingCoeffs::b1)
      .def_readwrite("b2", &stn::DampingCoeffs::b2)
      .def_readwrite("b3", &stn::DampingCoeffs::b3);

  py::class_<stn::NoiseModel>(m, "NoiseModel")
      .def(py::init<>())
      .def_readwrite("frame_size", &stn::NoiseModel::frame_size)
      .def_readwrite("filter_magnitudes", &stn::NoiseModel::filter_magnitudes)
      .def_readwrite("filter_frames", &stn::NoiseModel::filter_frames)
      .def_readwrite("means", &stn::NoiseModel::means)
      .def_readwrite("amplitudes", &stn::NoiseModel::amplitudes)
      .def_readwrite("seed", &stn::NoiseModel::seed);

  py::class_<stn::TransientModel>(m, "TransientModel")
      .def(py::init<>())
      .def_readwrite("dct_coeffs", &stn::TransientModel::dct_coeffs)
      .def_readwrite("gain", &stn::TransientModel::gain);

  py::class_<stn::NoteMetadata>(m, "NoteMetadata")
      .def(py::init<>())
      .def_readwrite("sample_rate", &stn::NoteMetadata::sample_rate)
      .def_readwrite("fit_config_hash", &stn::NoteMetadata::fit_config_hash);

  py::class_<stn::NoteModel>(m, "NoteModel")
      .def(py::init<>())
      .def_readwrite("key_id", &stn::NoteModel::key_id)
      .def_readwrite("velocity", &stn::NoteModel::velocity)
      .def_readwrite("f0", &stn::NoteModel::f0)
      .def_readwrite("inharmonicity", &stn::NoteModel::inharmonicity)
      .def_readwrite("detune", &stn::NoteModel::detune)
      .def_readwrite("partial_count", &stn::NoteModel::partial_count)
      .def_readwrite("alpha_v", &stn::NoteModel::alpha_v)
      .def_readwrite("alpha_h", &stn::NoteModel::alpha_h)
      .def_readwrite("damping", &stn::NoteModel::damping)
      .def_readwrite("noise", &stn::NoteModel::noise)
      .def_readwrite("transient", &stn::NoteModel::transient)
      .def_readwrite("metadata", &stn::NoteModel::metadata);

  py::class_<stn::VelocityBank>(m, "VelocityBank")
      .def(py::init<>())
      .def_readwrite("key_id", &stn::VelocityBank::key_id)
      .def_readwrite("entries", &stn::VelocityBank::entries);

  py::class_<stn::PeakEstimate>(m, "PeakEstimate")
      .def(py::init<>())
      .def_readwrite("partial_index", &stn::PeakEstimate::partial_index)
      .def_readwrite("frequency_hz", &stn::PeakEstimate::frequency_hz)
      .def_readwrite("magnitude_db", &stn::PeakEstimate::magnitude_db)
      .def("__repr__", [](const stn::PeakEstimate& p) {
        return "PeakEstimate(m=" + std::to_string(p.partial_index) +
               ", f=" + std::to_string(p.frequency_hz) + " Hz)";
      });

  // ---- basic synthesis -------------------------------------------------
  m.def("midi_to_frequency", &stn::midi_to_frequency, py::arg("midi_note"));
  m.def("partial_frequencies", &stn::partial_frequencies, py::arg("f0"),
        py::arg("inharmonicity"), py::arg("count"), py::arg("nyquist"));
  m.def("default_partial_count", &stn::default_partial_count, py::arg("f0"),
        py::arg("inharmonicity"), py::arg("sample_rate"));

  m.def(
      "render_note",
      [](const stn::NoteModel& model, std::size_t duration_samples, bool include_phantoms,
         bool include_noise, bool include_transient) {
        stn::RenderOptions options;
        options.include_phantoms = include_phantoms;
        options.include_noise = include_noise;
        options.include_transient = include_transient;
        const stn::RenderResult r = stn::render_note(model, duration_samples, options);
        py::dict out;
        out["harmonic"] = to_array(r.harmonic);
        out["transient"] = to_array(r.transient);
        out["noise"] = to_array(r.noise);
        out["mix"] = to_array(r.mix);
        return out;
      },
      py::arg("model"), py::arg("duration_samples"), py::arg("include_phantoms") = true,
      py::arg("include_noise") = true, py::arg("include_transient") = true,
      "Renders a note; returns a dict of component arrays plus their exact sum");

  // ---- analysis --------------------------------------------------------
  m.def(
      "estimate_partial_peaks",
      [](const py::array_t<double>& samples, int sample_rate, double f0_hint, int count) {
        return stn::estimate_partial_peaks(to_buffer(samples, sample_rate), f0_hint, count);
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("f0_hint"), py::arg("count") = 6);
  m.def(
      "estimate_inharmonicity",
      [](const std::vector<stn::PeakEstimate>& peaks) {
        const stn::InharmonicityEstimate est = stn::estimate_inharmonicity(peaks);
        return py::make_tuple(est.mean, est.samples);
      },
      py::arg("peaks"), "Returns (mean, pairwise samples)");
  m.def("estimate_f0", &stn::estimate_f0, py::arg("peaks"), py::arg("inharmonicity"));
  m.def(
      "hpss",
      [](const py::array_t<double>& samples, int sample_rate) {
        const stn::AudioBuffer in = to_buffer(samples, sample_rate);
        const stn::Decomposition d = stn::hpss_decompose(in);
        py::dict out;
        out["harmonic"] = to_array(d.harmonic);
        out["percussive"] = to_array(d.transient);
        out["residual"] = to_array(stn::hpss_residual(in, d));
        return out;
      },
      py::arg("samples"), py::arg("sample_rate"),
      "Median-filter harmonic/percussive/residual split");

  // ---- losses ----------------------------------------------------------
  m.def(
      "stft_loss",
      [](const py::array_t<double>& pred, const py::array_t<double>& target, int sample_rate,
         const std::vector<std::size_t>& windows) {
        return stn::multires_stft_loss(to_buffer(pred, sample_rate),
                                       to_buffer(target, sample_rate), windows)
            .stft;
      },
      py::arg("pred"), py::arg("target"), py::arg("sample_rate"),
      py::arg("windows") = std::vector<std::size_t>(stn::kHarmonicLossWindows.begin(),
                                                    stn::kHarmonicLossWindows.end()));
  m.def(
      "rms_loss",
      [](const py::array_t<double>& pred, const py::array_t<double>& target, int sample_rate) {
        return stn::rms_mae_loss(to_buffer(pred, sample_rate), to_buffer(target, sample_rate));
      },
      py::arg("pred"), py::arg("target"), py::arg("sample_rate"));
  m.def("cent_loss", &stn::cent_loss, py::arg("pred_partials"), py::arg("target_partials"),
        py::arg("count") = 6);

  // ---- fitting ---------------------------------------------------------
  m.def(
      "fit_note_from_recording",
      [](const py::array_t<double>& samples, int sample_rate, const stn::NoteModel& init,
         double f0_hint, int stage1_epochs, int stage2_epochs, int threads) {
        const stn::FitTargets targets =
            stn::make_fit_targets(to_buffer(samples, sample_rate), f0_hint);
        stn::FitOptions options;
        if (stage1_epochs > 0) options.stage1.max_epochs = stage1_epochs;
        if (stage2_epochs > 0) options.stage2.max_epochs = stage2_epochs;
        options.threads = threads;
        const stn::NoteFitResult r = stn::fit_note(targets, init, options);
        py::dict out;
        out["model"] = r.model;
        out["stage1_final_cent"] = r.stage1_final_cent;
        out["stage2_final_loss"] = r.stage2_final_loss;
        out["epochs"] = r.history.size();
        return out;
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("init"), py::arg("f0_hint"),
      py::arg("stage1_epochs") = 0, py::arg("stage2_epochs") = 0, py::arg("threads") = 1);

  // ---- model store and audio io ---------------------------------------
  m.def("save_bank", &stn::save_bank, py::arg("bank"), py::arg("path"));
  m.def("load_bank", &stn::load_bank, py::arg("path"));
  m.def("interpolate_velocity", &stn::interpolate_velocity, py::arg("bank"),
        py::arg("velocity"));
  m.def(
      "read_wav",
      [](const std::filesystem::path& path) {
        const stn::WavReadResult r = stn::read_wav(path);
        return py::make_tuple(to_array(r.audio), r.audio.sample_rate);
      },
      py::arg("path"), "Returns (samples, sample_rate)");
  m.def(
      "write_wav",
      [](const std::filesystem::path& path, const py::array_t<double>& samples,
         int sample_rate) { stn::write_wav(path, to_buffer(samples, sample_rate)); },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"));
  m.def(
      "resample",
      [](const py::array_t<double>& samples, int sample_rate, int target_rate) {
        return to_array(stn::resample(to_buffer(samples, sample_rate), target_rate));
      },
      py::arg("samples"), py::arg("sample_rate"), py::arg("target_rate"));

  py::register_exception<stn::EstimationError>(m, "EstimationError");
  py::register_exception<stn::DivergenceError>(m, "DivergenceError");
  py::register_exception<stn::BankFormatError>(m, "BankFormatError");
  py::register_exception<stn::WavFormatError>(m, "WavFormatError");
}
