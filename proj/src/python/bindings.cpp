#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "namdkit/analysis/drift.hpp"
#include "namdkit/analysis/fes.hpp"
#include "namdkit/analysis/hbonds.hpp"
#include "namdkit/analysis/sasa.hpp"
#include "namdkit/analysis/selection.hpp"
#include "namdkit/analysis/structural.hpp"
#include "namdkit/cli.hpp"
#include "namdkit/error.hpp"
#include "namdkit/geometry.hpp"
#include "namdkit/io/dcd.hpp"
#include "namdkit/io/psf.hpp"
#include "namdkit/jobspec.hpp"
#include "namdkit/namd_config.hpp"

namespace py = pybind11;
using namespace namdkit;
using namespace namdkit::analysis;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Coords to_coords(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw py::value_error("expected an (N, 3) array");
  const auto r = a.unchecked<2>();
  Coords out(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
  return out;
}

Array from_coords(CoordsView c) {
  Array out({static_cast<py::ssize_t>(c.size()), py::ssize_t{3}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (int k = 0; k < 3; ++k) w(i, k) = c[i][k];
  return out;
}

std::vector<Frame> to_frames(const Array& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw py::value_error("expected a (frames, atoms, 3) array");
  const auto r = a.unchecked<3>();
  std::vector<Frame> out(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t f = 0; f < a.shape(0); ++f) {
    out[f].index = f;
    out[f].coords.resize(static_cast<std::size_t>(a.shape(1)));
    for (py::ssize_t i = 0; i < a.shape(1); ++i) out[f].coords[i] = Vec3(r(f, i, 0), r(f, i, 1), r(f, i, 2));
  }
  return out;
}

Selection selection_for(std::optional<std::vector<std::size_t>> indices, std::size_t n_atoms) {
  if (!indices) {
    indices.emplace(n_atoms);
    for (std::size_t i = 0; i < n_atoms; ++i) (*indices)[i] = i;
  }
  auto sel = make_selection(std::move(*indices), "python");
  sel.check(n_atoms);
  return sel;
}

Array values_of(const TimeSeries& ts) {
  const auto v = ts.values();
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())}, v.data());
}

py::dict findings_dict(const ValidationReport& r) {
  py::list findings;
  for (const auto& f : r.findings)
    findings.append(py::dict(py::arg("severity") = to_string(f.severity), py::arg("code") = f.code,
                             py::arg("message") = f.message, py::arg("subject") = f.subject));
  return py::dict(py::arg("passed") = r.passed(), py::arg("findings") = findings);
}

}  // namespace

PYBIND11_MODULE(_namdkit, m) {
  m.doc() = "Trajectory analysis, job specs and NAMD input generation";

  auto base = py::register_exception<Error>(m, "NamdkitError", PyExc_RuntimeError);
  auto parse = py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<EmptyStructureError>(m, "EmptyStructureError", parse.ptr());
  py::register_exception<CorruptRecordError>(m, "CorruptRecordError", base.ptr());
  py::register_exception<PartialTrajectoryError>(m, "PartialTrajectoryError", base.ptr());
  auto domain = py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<UnsupportedCellError>(m, "UnsupportedCellError", domain.ptr());
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", domain.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", domain.ptr());
  py::register_exception<MissingRadiusError>(m, "MissingRadiusError", domain.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  auto fetch = py::register_exception<FetchError>(m, "FetchError", base.ptr());
  py::register_exception<NotFoundError>(m, "NotFoundError", fetch.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<RefusalError>(m, "RefusalError", base.ptr());

  py::class_<Structure>(m, "Structure")
      .def_property_readonly("n_atoms", &Structure::size)
      .def_property_readonly("coordinates", [](const Structure& s) { return from_coords(s.coordinates()); })
      .def_property_readonly("masses", &Structure::masses)
      .def_property_readonly("atom_names", [](const Structure& s) {
        std::vector<std::string> out;
        for (const auto& a : s.atoms) out.push_back(a.name);
        return out;
      })
      .def_property_readonly("res_names", [](const Structure& s) {
        std::vector<std::string> out;
        for (const auto& a : s.atoms) out.push_back(a.res_name);
        return out;
      })
      .def_property_readonly("elements", [](const Structure& s) {
        std::vector<std::string> out;
        for (const auto& a : s.atoms) out.push_back(a.element);
        return out;
      })
      .def("select", [](const Structure& s, std::string_view expr) { return select(s, expr).atom_indices; },
           py::arg("expression"))
      .def("to_pdb", [](const Structure& s) { return write_pdb(s); });

  m.def("parse_pdb", [](std::string_view text) { return parse_pdb(text); }, py::arg("text"));
  m.def("read_pdb", &read_pdb_file, py::arg("path"));

  py::class_<Topology>(m, "Topology")
      .def_property_readonly("n_atoms", &Topology::size)
      .def_readonly("masses", &Topology::masses)
      .def_readonly("elements", &Topology::elements)
      .def_readonly("bonds", &Topology::bonds)
      .def_readonly("donors", &Topology::donors)
      .def_readonly("acceptors", &Topology::acceptors);
  m.def("read_psf", &read_psf_file, py::arg("path"));
  m.def("topology_from_structure", [](const Structure& s) { return topology_from_structure(s); }, py::arg("structure"));

  m.def(
      "read_dcd",
      [](const std::string& path) {
        const auto t = read_dcd_file(path);
        const auto n_atoms = static_cast<py::ssize_t>(t.header.n_atoms);
        Array coords({static_cast<py::ssize_t>(t.frames.size()), n_atoms, py::ssize_t{3}});
        auto w = coords.mutable_unchecked<3>();
        py::list cells;
        for (std::size_t f = 0; f < t.frames.size(); ++f) {
          for (py::ssize_t i = 0; i < n_atoms; ++i)
            for (int k = 0; k < 3; ++k) w(f, i, k) = t.frames[f].coords[i][k];
          if (const auto& c = t.frames[f].unit_cell)
            cells.append(py::make_tuple(c->a, c->b, c->c, c->alpha, c->beta, c->gamma));
          else
            cells.append(py::none());
        }
        const auto ns = ns_per_frame(t.header);
        return py::dict(py::arg("coords") = coords, py::arg("unit_cells") = cells,
                        py::arg("first_step") = t.header.first_step, py::arg("step_interval") = t.header.step_interval,
                        py::arg("timestep") = t.header.timestep, py::arg("titles") = t.header.titles,
                        py::arg("ns_per_frame") = ns ? py::cast(*ns) : py::none());
      },
      py::arg("path"), "Reads a DCD file into a dict with a (frames, atoms, 3) 'coords' array.");
  m.def(
      "write_dcd",
      [](const std::string& path, const Array& coords, double timestep_fs, int first_step, int step_interval) {
        const auto frames = to_frames(coords);
        DcdHeader h;
        h.n_frames = static_cast<std::int32_t>(frames.size());
        h.n_atoms = static_cast<std::int32_t>(coords.shape(1));
        h.first_step = first_step;
        h.step_interval = step_interval;
        h.timestep = static_cast<float>(timestep_fs / kAkmaFemtoseconds);
        write_dcd_file(path, h, frames);
      },
      py::arg("path"), py::arg("coords"), py::arg("timestep_fs") = 2.0, py::arg("first_step") = 0,
      py::arg("step_interval") = 1);

  m.def(
      "kabsch",
      [](const Array& mobile, const Array& reference, std::optional<std::vector<double>> weights) {
        const auto sp = geometry::kabsch(to_coords(mobile), to_coords(reference),
                                         weights ? std::span<const double>(*weights) : std::span<const double>{});
        Array rot({3, 3});
        auto w = rot.mutable_unchecked<2>();
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) w(r, c) = sp.rotation(r, c);
        return py::make_tuple(rot, from_coords(std::vector<Vec3>{sp.translation}).reshape({3}), sp.rmsd_after);
      },
      py::arg("mobile"), py::arg("reference"), py::arg("weights") = py::none(),
      "Optimal rotation, translation and RMSD mapping mobile onto reference.");

  m.def(
      "rmsd_series",
      [](const Array& traj, const Array& reference, std::optional<std::vector<std::size_t>> indices, bool superpose,
         unsigned threads) {
        const auto frames = to_frames(traj);
        const auto ref = to_coords(reference);
        return values_of(rmsd_series(frames, ref, selection_for(std::move(indices), ref.size()), superpose, {threads}));
      },
      py::arg("traj"), py::arg("reference"), py::arg("indices") = py::none(), py::arg("superpose") = true,
      py::arg("threads") = 0);
  m.def(
      "radius_of_gyration",
      [](const Array& traj, const std::vector<double>& masses, std::optional<std::vector<std::size_t>> indices,
         unsigned threads) {
        const auto frames = to_frames(traj);
        return values_of(
            radius_of_gyration_series(frames, selection_for(std::move(indices), masses.size()), masses, {threads}));
      },
      py::arg("traj"), py::arg("masses"), py::arg("indices") = py::none(), py::arg("threads") = 0);
  m.def(
      "rmsf",
      [](const Array& traj, const Structure& s, std::optional<std::vector<std::size_t>> indices, bool superpose) {
        const auto frames = to_frames(traj);
        RmsfOptions opt;
        opt.superpose = superpose;
        return rmsf(frames, s, selection_for(std::move(indices), s.size()), opt).values;
      },
      py::arg("traj"), py::arg("structure"), py::arg("indices") = py::none(), py::arg("superpose") = true);
  m.def(
      "sasa",
      [](const Array& coords, const Structure& s, std::optional<std::vector<std::size_t>> indices, double probe,
         int n_points) {
        const auto sel = selection_for(std::move(indices), s.size());
        const auto atoms = sasa_atoms(s, sel);
        const auto c = to_coords(coords);
        const auto r = sasa_frame(c, sel, atoms, probe, n_points);
        return py::dict(py::arg("total") = r.total, py::arg("polar") = r.polar, py::arg("apolar") = r.apolar,
                        py::arg("per_atom") = r.per_atom, py::arg("warnings") = atoms.warnings);
      },
      py::arg("coords"), py::arg("structure"), py::arg("indices") = py::none(), py::arg("probe") = kDefaultProbeRadius,
      py::arg("n_points") = kDefaultSpherePoints);
  m.def(
      "detect_hbonds",
      [](const Array& coords, const Topology& topology, double dist_cutoff, double angle_cutoff,
         std::optional<std::array<double, 3>> box) {
        Frame f{0, to_coords(coords), std::nullopt};
        HBondOptions opt{dist_cutoff, angle_cutoff, box.has_value()};
        if (box) f.unit_cell = UnitCell{(*box)[0], (*box)[1], (*box)[2]};
        py::list out;
        for (const auto& r : detect_hbonds(f, topology, opt))
          out.append(py::make_tuple(r.donor, r.hydrogen, r.acceptor, r.distance, r.angle));
        return out;
      },
      py::arg("coords"), py::arg("topology"), py::arg("dist_cutoff") = 3.5, py::arg("angle_cutoff") = 120.0,
      py::arg("box") = py::none(), "List of (donor, hydrogen, acceptor, distance, angle) tuples.");
  m.def(
      "drift_check",
      [](const std::vector<double>& rmsd, double ns_per_frame) {
        TimeSeries ts{"RMSD", "Å", {}};
        for (std::size_t i = 0; i < rmsd.size(); ++i) ts.points.push_back({static_cast<std::int64_t>(i), rmsd[i]});
        DriftOptions opt;
        opt.ns_per_frame = ns_per_frame;
        const auto r = drift_check(ts, opt);
        return py::dict(py::arg("verdict") = to_string(r.verdict), py::arg("slope") = r.slope,
                        py::arg("mean_level") = r.mean_level, py::arg("window_points") = r.window_points,
                        py::arg("reason") = r.reason);
      },
      py::arg("rmsd"), py::arg("ns_per_frame") = 0.01);
  m.def(
      "free_energy_surface",
      [](const std::vector<double>& rg, const std::vector<double>& rmsd, int bins) {
        TimeSeries a{"Rg", "Å", {}}, b{"RMSD", "Å", {}};
        for (std::size_t i = 0; i < rg.size(); ++i) a.points.push_back({static_cast<std::int64_t>(i), rg[i]});
        for (std::size_t i = 0; i < rmsd.size(); ++i) b.points.push_back({static_cast<std::int64_t>(i), rmsd[i]});
        const auto g = free_energy_surface(a, b, bins);
        Array fe({static_cast<py::ssize_t>(g.n_rg()), static_cast<py::ssize_t>(g.n_rmsd())});
        auto w = fe.mutable_unchecked<2>();
        for (std::size_t i = 0; i < g.n_rg(); ++i)
          for (std::size_t j = 0; j < g.n_rmsd(); ++j) w(i, j) = g.free_energy[g.cell(i, j)];
        return py::dict(py::arg("free_energy") = fe, py::arg("rg_edges") = g.rg_edges,
                        py::arg("rmsd_edges") = g.rmsd_edges, py::arg("counts") = g.counts);
      },
      py::arg("rg"), py::arg("rmsd"), py::arg("bins") = 30);

  py::class_<JobSpec>(m, "JobSpec")
      .def_readonly("label", &JobSpec::label)
      .def_readonly("pdb_id", &JobSpec::pdb_id)
      .def_readonly("temperature", &JobSpec::temperature)
      .def_readonly("hmr", &JobSpec::hmr)
      .def_readonly("periodic", &JobSpec::periodic)
      .def_readonly("ion_type", &JobSpec::ion_type)
      .def_readonly("ion_concentration", &JobSpec::ion_concentration)
      .def_property_readonly("case_type", [](const JobSpec& s) { return to_string(s.case_type); })
      .def_property_readonly("xy_dim",
                             [](const JobSpec& s) { return s.membrane ? py::cast(s.membrane->xy_dim) : py::none(); })
      .def("to_yaml", &serialize_jobspec)
      .def("__eq__", [](const JobSpec& a, const JobSpec& b) { return a == b; });
  m.def(
      "parse_jobspec", [](std::string_view text) { return clean_jobspec(parse_jobspec(text).spec); }, py::arg("text"),
      "Parses and canonicalizes a YAML job spec. Raises SchemaError on invalid input.");
  m.def(
      "validate_jobspec",
      [](const JobSpec& spec, const Structure* structure, double margin) {
        return findings_dict(validate_jobspec(spec, structure, margin));
      },
      py::arg("spec"), py::arg("structure") = nullptr, py::arg("margin") = kDefaultMembraneMargin);
  m.def(
      "generate_configs",
      [](const JobSpec& spec, const std::string& psf, const std::string& pdb, const std::vector<std::string>& params,
         std::optional<std::string> xsc) {
        py::dict out;
        for (const auto& c : generate_configs(spec, InputPaths{psf, pdb, params, xsc}))
          out[to_string(c.stage)] = render_config(c);
        return out;
      },
      py::arg("spec"), py::arg("psf"), py::arg("pdb"), py::arg("params"), py::arg("xsc") = py::none(),
      "Rendered minimization, equilibration and production configs keyed by stage.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "namdkit");
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line; returns (exit_code, stdout, stderr).");
}
