#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "spoofbench/common.hpp"
#include "spoofbench/embed.hpp"
#include "spoofbench/imaging.hpp"
#include "spoofbench/materials.hpp"
#include "spoofbench/minutiae.hpp"
#include "spoofbench/patches.hpp"
#include "spoofbench/protocol.hpp"
#include "spoofbench/scorer.hpp"

namespace py = pybind11;
namespace sb = spoofbench;

namespace {

using U8Array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using F64Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

U8Array to_numpy(const sb::GrayImage& img) {
  U8Array out({img.height(), img.width()});
  std::memcpy(out.mutable_data(), img.pixels().data(), img.size());
  return out;
}

sb::GrayImage from_numpy(const U8Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D uint8 array");
  const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1));
  return sb::GrayImage(w, h, std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

sb::embed::Matrix to_matrix(const F64Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D float array");
  return {static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
          std::vector<double>(a.data(), a.data() + a.size())};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Minutiae-patch presentation attack detection toolkit";

  py::register_exception<sb::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<sb::DataError>(m, "DataError", PyExc_IOError);
  py::register_exception<sb::ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  py::enum_<sb::MinutiaKind>(m, "MinutiaKind")
      .value("Ending", sb::MinutiaKind::Ending)
      .value("Bifurcation", sb::MinutiaKind::Bifurcation);

  py::class_<sb::Minutia>(m, "Minutia")
      .def_readonly("x", &sb::Minutia::x)
      .def_readonly("y", &sb::Minutia::y)
      .def_readonly("theta", &sb::Minutia::theta)
      .def_readonly("kind", &sb::Minutia::kind)
      .def_readonly("quality", &sb::Minutia::quality)
      .def("__repr__", [](const sb::Minutia& mi) {
        return "Minutia(x=" + std::to_string(mi.x) + ", y=" + std::to_string(mi.y) + ", kind=" +
               std::string(sb::to_string(mi.kind)) + ")";
      });

  m.def("synth_fingerprint", [](std::uint64_t seed, int width, int height, double period) {
    return to_numpy(sb::imaging::synth_fingerprint(seed, width, height, period));
  }, py::arg("seed"), py::arg("width") = 256, py::arg("height") = 256, py::arg("ridge_period") = 9.0);

  m.def("detect_minutiae", [](const U8Array& img) {
    const auto image = from_numpy(img);
    py::gil_scoped_release release;
    return sb::minutiae::detect(image).minutiae;
  }, py::arg("image"), "Orientation, binarisation, thinning and crossing-number extraction.");

  m.def("extract_patch", [](const U8Array& img, double x, double y, double theta) {
    return to_numpy(sb::patches::extract_patch(from_numpy(img), x, y, theta).pixels);
  }, py::arg("image"), py::arg("x"), py::arg("y"), py::arg("theta"));

  m.def("kmeans", [](const F64Array& pts, int k, std::uint64_t seed, int restarts) {
    if (pts.ndim() != 2 || pts.shape(1) != 2) throw py::value_error("expected an (n, 2) array");
    std::vector<sb::patches::Point2> p;
    for (py::ssize_t i = 0; i < pts.shape(0); ++i) p.push_back({pts.at(i, 0), pts.at(i, 1)});
    const auto a = sb::patches::kmeans_points(p, k, seed, restarts);
    py::dict out;
    out["labels"] = a.labels;
    out["sizes"] = a.sizes;
    out["wcss"] = a.wcss;
    std::vector<std::pair<double, double>> c;
    for (const auto& q : a.centroids) c.emplace_back(q.x, q.y);
    out["centroids"] = c;
    return out;
  }, py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 5);

  m.def("featurize", [](const U8Array& patch) {
    const auto f = sb::scorer::featurize(from_numpy(patch));
    return std::vector<double>(f.begin(), f.end());
  }, py::arg("patch"));

  m.def("tdr_at_fdr", [](const std::vector<double>& bona, const std::vector<double>& pa, double target) {
    const auto p = sb::protocol::tdr_at_fdr(bona, pa, target);
    return py::make_tuple(p.tdr, p.threshold, p.fdr);
  }, py::arg("bonafide_scores"), py::arg("pa_scores"), py::arg("fdr_target") = 0.002,
     "Returns (tdr, threshold, fdr); threshold is inf when nothing can be flagged.");

  m.def("pearson", [](const std::vector<double>& x, const std::vector<double>& y) {
    return sb::materials::pearson(x, y);
  });

  m.def("complete_link", [](const std::vector<std::string>& labels, const F64Array& corr) {
    sb::materials::CorrelationMatrix c{labels, std::vector<double>(corr.data(), corr.data() + corr.size())};
    if (c.values.size() != labels.size() * labels.size()) throw py::value_error("matrix does not match labels");
    const auto d = sb::materials::complete_link(c);
    std::vector<py::tuple> merges;
    for (const auto& mg : d.merges) merges.push_back(py::make_tuple(mg.left, mg.right, mg.height, mg.size));
    return py::make_tuple(merges, sb::materials::to_newick(d));
  }, py::arg("labels"), py::arg("corr"), "Returns (merges, newick); merges are (left, right, height, size).");

  m.def("tsne", [](const F64Array& x, double perplexity, int iterations, std::uint64_t seed) {
    const auto mat = to_matrix(x);
    sb::embed::EmbeddingConfig cfg;
    cfg.perplexity = perplexity;
    cfg.iterations = iterations;
    cfg.seed = seed;
    sb::embed::Embedding e;
    {
      py::gil_scoped_release release;
      e = sb::embed::tsne(mat, cfg);
    }
    F64Array out({static_cast<py::ssize_t>(mat.rows), py::ssize_t{3}});
    std::memcpy(out.mutable_data(), e.coords.data(), e.coords.size() * sizeof(double));
    return py::make_tuple(out, e.kl_trace);
  }, py::arg("x"), py::arg("perplexity") = 30.0, py::arg("iterations") = 1000, py::arg("seed") = 0,
     "Exact 3-D t-SNE. Returns (coords, kl_trace).");
}
