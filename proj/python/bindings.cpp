#include "ringsig/channel.hpp"
#include "ringsig/classifier.hpp"
#include "ringsig/error.hpp"
#include "ringsig/experiments.hpp"
#include "ringsig/features.hpp"
#include "ringsig/framing.hpp"
#include "ringsig/iq_io.hpp"
#include "ringsig/shaping.hpp"
#include "ringsig/sync.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

namespace py = pybind11;
using namespace ringsig;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;
using UArray = py::array_t<std::uint32_t, py::array::c_style | py::array::forcecast>;
using BArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

template <typename T>
std::span<const T> view(const py::array_t<T, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 1)
        throw Error(ErrorCode::DomainError, "expected a one-dimensional array");
    return {a.data(), static_cast<std::size_t>(a.size())};
}

template <typename T>
py::array_t<T> to_numpy(const std::vector<T>& v)
{
    py::array_t<T> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<double> features_array(const FeatureVector& f)
{
    py::array_t<double> out(static_cast<py::ssize_t>(f.size()));
    std::copy(f.begin(), f.end(), out.mutable_data());
    return out;
}

py::dict probabilities(const std::array<double, kSchemeCount>& p)
{
    py::dict d;
    for (auto s : kAllSchemes)
        d[py::str(std::string(to_string(s)))] = p[scheme_slot(s)];
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Ring-shaped PSK modem, channel, receiver and modulation classifier";

    // Instances carry the library error code as `.code`.
    static PyObject* error = PyErr_NewException("ringsig._core.RingsigError", PyExc_RuntimeError, nullptr);
    m.add_object("RingsigError", py::handle(error));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = py::handle(error)(e.what());
            exc.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(error, exc.ptr());
        }
    });

    py::enum_<Scheme>(m, "Scheme")
        .value("BPSK", Scheme::Bpsk)
        .value("QPSK", Scheme::Qpsk)
        .value("PSK8", Scheme::Psk8)
        .value("PSK16", Scheme::Psk16)
        .value("PSK32", Scheme::Psk32)
        .value("PSK64", Scheme::Psk64)
        .value("QAM8", Scheme::Qam8)
        .value("QAM16", Scheme::Qam16)
        .value("QAM32", Scheme::Qam32)
        .value("QAM64", Scheme::Qam64);
    m.def("scheme_name", [](Scheme s) { return std::string(to_string(s)); });
    m.def("parse_scheme", [](const std::string& name) {
        auto s = parse_scheme(name);
        if (!s)
            throw Error(ErrorCode::ConfigError, "unknown scheme " + name);
        return *s;
    });
    m.def("order", &order);
    m.def("bits_per_symbol", &bits_per_symbol);

    // modem
    m.def("constellation", [](Scheme s, double a) { return to_numpy(constellation(s, a)); }, py::arg("scheme"),
          py::arg("amplitude") = 1.0);
    m.def("bits_to_symbols", [](const BArray& bits, Scheme s) { return to_numpy(bits_to_symbol_indices(view(bits), s)); });
    m.def("symbols_to_bits", [](const UArray& idx, Scheme s) { return to_numpy(symbol_indices_to_bits(view(idx), s)); });
    m.def("modulate",
          [](const UArray& idx, Scheme s, double a) { return to_numpy(modulate(view(idx), ModConfig{s, a})); },
          py::arg("indices"), py::arg("scheme"), py::arg("amplitude") = 1.0);
    m.def("demodulate",
          [](const CArray& x, Scheme s, double a) { return to_numpy(demodulate(view(x), ModConfig{s, a})); },
          py::arg("samples"), py::arg("scheme"), py::arg("amplitude") = 1.0);

    // shaping
    py::class_<ShapingConfig>(m, "ShapingConfig")
        .def(py::init([](std::uint64_t seed, int ip, double im) { return ShapingConfig{seed, ip, im}; }),
             py::arg("seed") = 0, py::arg("phase_intensity") = 0, py::arg("magnitude_intensity") = 1.0)
        .def_readwrite("seed", &ShapingConfig::seed)
        .def_readwrite("phase_intensity", &ShapingConfig::phase_intensity)
        .def_readwrite("magnitude_intensity", &ShapingConfig::magnitude_intensity);
    m.def(
        "shaping_factors",
        [](const ShapingConfig& cfg, std::size_t count, std::size_t first) {
            auto f = make_factor_stream(cfg, count, first);
            return py::make_tuple(to_numpy(f.thetas), to_numpy(f.magnitudes));
        },
        py::arg("config"), py::arg("count"), py::arg("first") = 0, "(thetas, magnitudes) for symbols [first, first+count)");
    m.def(
        "apply_shaping",
        [](const CArray& x, const ShapingConfig& cfg, std::size_t first) {
            return to_numpy(apply_shaping(view(x), make_factor_stream(cfg, x.size(), first)));
        },
        py::arg("samples"), py::arg("config"), py::arg("first") = 0);
    m.def(
        "invert_shaping",
        [](const CArray& x, const ShapingConfig& cfg, std::size_t first) {
            return to_numpy(invert_shaping(view(x), make_factor_stream(cfg, x.size(), first)));
        },
        py::arg("samples"), py::arg("config"), py::arg("first") = 0);
    m.def("ring_power", &ring_power, py::arg("amplitude"), py::arg("magnitude_intensity"));
    m.def("q_function", &q_function);
    m.def(
        "theoretical_ber_ring",
        [](double es_n0, double im, bool averaged) {
            return theoretical_ber_ring(es_n0, im, averaged ? RingBerMode::Averaged : RingBerMode::Literal);
        },
        py::arg("es_n0"), py::arg("magnitude_intensity"), py::arg("averaged") = false);
    m.def("theoretical_ber_mpsk", &theoretical_ber_mpsk, py::arg("scheme"), py::arg("es_n0"));
    m.def("effective_order", &effective_order, py::arg("scheme"), py::arg("phase_intensity"));

    // channel
    m.def(
        "apply_channel",
        [](const CArray& x, double es_n0_db, double cfo, double phase, std::uint64_t seed) {
            ChannelConfig ch;
            ch.es_n0_db = es_n0_db;
            ch.cfo = cfo;
            ch.phase_offset = phase;
            ch.noise_seed = seed;
            return to_numpy(apply_channel(view(x), ch));
        },
        py::arg("samples"), py::arg("es_n0_db") = std::numeric_limits<double>::infinity(), py::arg("cfo") = 0.0,
        py::arg("phase_offset") = 0.0, py::arg("noise_seed") = 0);

    // framing and receiver
    py::class_<FrameSpec>(m, "FrameSpec")
        .def(py::init<>())
        .def_readwrite("header_symbols", &FrameSpec::header_symbols)
        .def_readwrite("data_bits", &FrameSpec::data_bits)
        .def_readwrite("message", &FrameSpec::message);
    m.def("header_pattern", &header_pattern);
    m.def("message_bits", [](const std::string& msg, std::size_t n) { return to_numpy(expand_message_to_bits(msg, n)); });
    m.def(
        "build_frame",
        [](const BArray& bits, const FrameSpec& spec, Scheme s, const ShapingConfig& sh, double a) {
            auto f = build_frame(view(bits), spec, ModConfig{s, a}, sh);
            py::dict d;
            d["samples"] = to_numpy(f.symbols());
            d["header_length"] = f.header.size();
            d["payload_bits"] = to_numpy(f.payload_bits);
            return d;
        },
        py::arg("bits"), py::arg("spec"), py::arg("scheme"), py::arg("shaping"), py::arg("amplitude") = 1.0);
    m.def(
        "receive_frame",
        [](const CArray& x, const FrameSpec& spec, Scheme s, const ShapingConfig& sh, double a, bool estimate_cfo,
           bool track_phase, const std::optional<BArray>& reference) {
            SyncConfig sync;
            sync.effective_order = effective_order(s, sh.phase_intensity);
            sync.estimate_cfo = estimate_cfo;
            sync.track_phase = track_phase;
            std::span<const std::uint8_t> ref;
            if (reference)
                ref = view(*reference);
            auto r = receive_frame(view(x), ModConfig{s, a}, sh, spec, sync, ref);
            py::dict d;
            d["bits"] = to_numpy(r.bits);
            d["frame_start"] = r.sync.frame_start;
            d["cfo_estimate"] = r.sync.cfo_estimate;
            d["phase_estimate"] = r.sync.phase_estimate;
            d["correlation_peak"] = r.sync.correlation_peak;
            d["bit_errors"] = r.stats.bit_errors;
            d["bits_compared"] = r.stats.bits_compared;
            d["symbol_errors"] = r.stats.symbol_errors;
            return d;
        },
        py::arg("samples"), py::arg("spec"), py::arg("scheme"), py::arg("shaping"), py::arg("amplitude") = 1.0,
        py::arg("estimate_cfo") = true, py::arg("track_phase") = true, py::arg("reference_bits") = py::none());
    m.def(
        "estimate_freq_offset",
        [](const CArray& x, unsigned m_eff) {
            SyncConfig sync;
            sync.effective_order = m_eff;
            return estimate_freq_offset(view(x), sync);
        },
        py::arg("samples"), py::arg("effective_order"));

    // classifier
    m.def("feature_names", [] {
        std::vector<std::string> names;
        for (auto n : feature_names())
            names.emplace_back(n);
        return names;
    });
    m.def("extract_features", [](const CArray& x) { return features_array(extract_features(view(x))); });
    py::class_<ClassifierModel>(m, "ClassifierModel")
        .def_static("load", py::overload_cast<const std::filesystem::path&>(&ClassifierModel::load))
        .def("save", py::overload_cast<const std::filesystem::path&>(&ClassifierModel::save, py::const_))
        .def_property_readonly("shrinkage", &ClassifierModel::shrinkage)
        .def_property_readonly("component_count", [](const ClassifierModel& c) { return c.components().size(); })
        .def("test_accuracy", [](const ClassifierModel& c) { return probabilities(c.test_accuracy()); })
        .def(
            "classify",
            [](const ClassifierModel& c, const CArray& x, std::optional<double> snr_db) {
                auto r = classify(view(x), c, snr_db);
                return py::make_tuple(r.scheme, probabilities(r.scores));
            },
            py::arg("samples"), py::arg("snr_db") = py::none());
    m.def(
        "train_classifier",
        [](std::size_t blocks, std::size_t length, std::uint64_t seed) {
            DatasetConfig d;
            d.blocks_per_class = blocks;
            d.block_length = length;
            d.seed = seed;
            py::gil_scoped_release release;
            return train(synthesize_features(d));
        },
        py::arg("blocks_per_class") = 20000, py::arg("block_length") = 1024, py::arg("seed") = 1);

    // files
    m.def("read_iq", [](const std::filesystem::path& p) { return to_numpy(read_iq_file(p)); });
    m.def("read_iq_range", [](const std::filesystem::path& p, std::size_t offset, std::size_t count) {
        return to_numpy(read_iq_file(p, offset, count));
    });
    m.def("write_iq", [](const std::filesystem::path& p, const CArray& x) { write_iq_file(p, view(x)); });
    m.def("read_metadata", [](const std::filesystem::path& p) { return read_metadata(p).entries; });
    m.def("read_manifest", [](const std::filesystem::path& dir) {
        py::list rows;
        for (const auto& r : read_manifest(dir)) {
            py::dict d;
            d["file"] = r.file;
            d["block"] = r.block;
            d["offset"] = r.offset;
            d["length"] = r.length;
            d["label"] = std::string(to_string(r.label));
            d["snr_db"] = r.snr_db;
            d["seed"] = r.seed;
            d["split"] = std::string(to_string(r.split));
            rows.append(d);
        }
        return rows;
    });
    m.def("read_pmi_csv", [](const std::filesystem::path& p) {
        std::ifstream is(p);
        if (!is)
            throw Error(ErrorCode::IoError, "cannot open " + p.string());
        py::list rows;
        for (const auto& r : read_pmi_csv(is)) {
            py::dict d;
            d["I_m"] = r.magnitude_intensity;
            d["I_p"] = r.phase_intensity;
            d["es_n0_db"] = r.es_n0_db;
            d["trials"] = r.trials;
            d["probability"] = probabilities(r.probability);
            rows.append(d);
        }
        return rows;
    });

    // configuration
    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_static("load", &ExperimentConfig::load)
        .def("set", &ExperimentConfig::apply, py::arg("key"), py::arg("value"))
        .def("canonical", &ExperimentConfig::canonical)
        .def("provenance", &ExperimentConfig::provenance)
        .def_property(
            "out", [](const ExperimentConfig& c) { return c.out; },
            [](ExperimentConfig& c, const std::filesystem::path& p) { c.out = p; })
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("trials", &ExperimentConfig::trials);
    m.def("config_keys", [] {
        std::vector<std::tuple<std::string, std::string, std::string>> keys;
        for (const auto& k : ExperimentConfig::schema())
            keys.emplace_back(k.key, k.type, k.description);
        return keys;
    });
    m.def(
        "simulate_link",
        [](const ExperimentConfig& cfg, Scheme s, double es_n0_db, int ip, double im, std::size_t min_bits,
           bool attacker) {
            LinkStats st;
            {
                py::gil_scoped_release release;
                st = simulate_link(cfg, s, es_n0_db, ip, im, min_bits, attacker);
            }
            py::dict d;
            d["frames"] = st.frames;
            d["frames_lost"] = st.frames_lost;
            d["bits"] = st.bits;
            d["bit_errors"] = st.bit_errors;
            d["ber"] = st.ber();
            d["ser"] = st.ser();
            d["attacker_ber"] = st.attacker_ber();
            d["e0_n0"] = st.e0_n0;
            return d;
        },
        py::arg("config"), py::arg("scheme"), py::arg("es_n0_db"), py::arg("phase_intensity"),
        py::arg("magnitude_intensity"), py::arg("min_bits"), py::arg("attacker") = false);
}
