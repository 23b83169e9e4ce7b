#include "commands.hpp"

#include "hybavg/errors.hpp"
#include "hybavg/record.hpp"

#include <catch_amalgamated.hpp>

#include <sstream>

using namespace hybavg;
using namespace hybavg::cli;

namespace {

std::string body(const std::string& record) { return record.substr(0, record.find("[metadata]")); }

CommonOptions opts(const std::string& model) {
  CommonOptions o;
  o.model = model;
  return o;
}

}  // namespace

TEST_CASE("parameter overrides") {
  const auto p = parse_overrides({"--beta", "8", "--x1-star=2.5", "--eps", "1e-2"});
  CHECK(p.at("beta") == 8.0);
  CHECK(p.at("x1_star") == 2.5);
  CHECK(p.at("eps") == 0.01);
  CHECK_THROWS_AS(parse_overrides({"--beta"}), InvalidArgument);
  CHECK_THROWS_AS(parse_overrides({"--beta", "eight"}), InvalidArgument);
  CHECK_THROWS_AS(parse_overrides({"--beta", "8x"}), InvalidArgument);
  CHECK_THROWS_AS(parse_overrides({"beta", "8"}), InvalidArgument);
}

TEST_CASE("certify output is identical across runs apart from metadata") {
  std::ostringstream a, b;
  CHECK(cmd_certify(opts("hopper"), a) == kOk);
  CHECK(cmd_certify(opts("hopper"), b) == kOk);
  CHECK(body(a.str()) == body(b.str()));
  const auto kv = parse_record(a.str());
  CHECK(kv.at("verdict") == "\"stable\"");
  CHECK(kv.count("metadata.generated_at") == 1);
}

TEST_CASE("sweep output is identical across runs apart from metadata") {
  std::ostringstream a, b;
  cmd_sweep(opts("classical"), 0.01, 0.5, 6, a);
  cmd_sweep(opts("classical"), 0.01, 0.5, 6, b);
  CHECK(body(a.str()) == body(b.str()));
}

TEST_CASE("certify reports the counterexample as not certified") {
  std::ostringstream os;
  CHECK(cmd_certify(opts("nonhyperbolic"), os) == kNegative);
  CHECK(parse_record(os.str()).at("verdict") == "\"degenerate_W\"");
}

TEST_CASE("quiet suppresses the record on stdout") {
  CommonOptions o = opts("hopper");
  o.quiet = true;
  std::ostringstream os;
  cmd_certify(o, os);
  CHECK(os.str().empty());
}

TEST_CASE("command argument errors") {
  std::ostringstream os;
  CHECK_THROWS_AS(cmd_simulate(opts("hopper"), 0, 0.0, false, os), InvalidArgument);
  CHECK_THROWS_AS(cmd_sweep(opts("hopper"), 0.01, 0.5, 3, os), InvalidArgument);
  CHECK_THROWS_AS(cmd_certify(opts("unicycle"), os), InvalidArgument);
}
