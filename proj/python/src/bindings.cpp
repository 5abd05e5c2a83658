#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jointscert/commands.hpp"
#include "jointscert/error.hpp"
#include "jointscert/io.hpp"

namespace py = pybind11;
using namespace jointscert;

namespace {

std::tuple<int, std::string, std::string> run(std::vector<std::string> args) {
  args.insert(args.begin(), "jointscert");
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::uint64_t> joints(const std::string& text) {
  const InstanceFile inst = parse_instance_text(text);
  const bool plain = inst.lines.distinct() > 0 || inst.families.empty();
  const JointSummary s = plain ? joint_summary(inst.lines) : joint_summary(inst.multi_family());
  std::map<std::string, std::uint64_t> out;
  for (const auto& [x, n] : s.multiplicity) out.emplace(x.to_string(), n);
  return out;
}

std::tuple<double, double, double> zhang(const std::string& text) {
  const InstanceFile inst = parse_instance_text(text);
  const bool plain = inst.lines.distinct() > 0 || inst.families.empty();
  const ZhangReport r = plain ? zhang_report(inst.lines) : zhang_report(inst.multi_family());
  return {r.lhs, r.rhs, r.ratio};
}

std::string factor(const std::string& text) {
  const InstanceFile inst = parse_instance_text(text);
  return certificate_to_json(factorise(inst.points)).dump();
}

std::tuple<bool, std::string> verify(const std::string& cert_text) {
  const VerifyResult v = verify_certificate(certificate_from_json(Json::parse(cert_text)));
  return {v.pass, v.witness};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact joints, heavy-chain and factorisation certificates";

  // Translators run newest first, so the base class goes in before its subclasses.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<MathError>(m, "MathError", PyExc_ArithmeticError);

  m.def("run", &run, py::arg("args"),
        "Run one command line; returns (exit code, stdout, stderr).");
  m.def(
      "grid_instance",
      [](std::size_t n, std::size_t d, std::uint64_t p) {
        return instance_to_json(grid_instance(n, d, p)).dump();
      },
      py::arg("n"), py::arg("d") = 3, py::arg("p") = 5);
  m.def("joints", &joints, py::arg("instance"), "Joint multiplicities keyed by point.");
  m.def("zhang", &zhang, py::arg("instance"), "(lhs, rhs, ratio) of the joints inequality.");
  m.def("factor", &factor, py::arg("instance"), "Certificate JSON for the instance's points.");
  m.def("verify", &verify, py::arg("certificate"), "(pass, witness) of an exhaustive re-check.");
}
