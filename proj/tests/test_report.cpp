#include <doctest.h>

#include <cstdlib>
#include <string>

#include "lkcurv/report.hpp"
#include "lkcurv/suites.hpp"

using namespace lkcurv;

namespace {
int cli(const std::string& args) {
  const std::string cmd = std::string(LKCURV_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}
}  // namespace

TEST_CASE("identity report json") {
  IdentityReport r;
  r.identity = "local-gb";
  r.space = "node";
  r.lhs = 1.01;
  r.rhs = 1.0;
  r.tol = default_tolerance("local-gb");
  decide(r);
  const Json j = to_json(r);
  for (const char* k : {"identity", "space", "function", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "tolerance",
                        "bound", "pass", "terms"})
    CHECK(j.contains(k));
  CHECK(j["pass"] == true);
  CHECK(j["tolerance"].contains("nsigma"));
  const Json doc = make_document("verify", Json::object(), Json::array({j}));
  CHECK(doc["schema"] == kReportSchema);
  CHECK(doc["summary"]["passed"] == 1);
  CHECK(doc["summary"]["failed"] == 0);
}

TEST_CASE("csv helpers") {
  CHECK(csv_number(0.5) == "0.5");
  CHECK(csv_row({"a", "b,c"}).find("\"b,c\"") != std::string::npos);
  const std::string t = identity_csv({IdentityReport{}});
  CHECK(t.find('\n') != std::string::npos);
}

TEST_CASE("bdk suite is exact") {
  SuiteRunner run({});
  for (const auto& n : {"node", "cubic_cone", "nodal_cubic_global"}) {
    for (const auto& r : run.run("bdk", builtin(n))) {
      CAPTURE(r.identity);
      CHECK(r.pass);
      CHECK(r.lhs == r.rhs);
    }
  }
}

TEST_CASE("cli exit codes") {
  CHECK(cli("list") == 0);
  CHECK(cli("describe --space node") == 0);
  CHECK(cli("verify bdk --space node") == 0);
  CHECK(cli("verify bdk --space " LKCURV_DATA_DIR "/node.json --format csv") == 0);
  CHECK(cli("verify nonsense") == 2);
  CHECK(cli("describe --space no_such_space") == 2);
  CHECK(cli("verify bdk --space node --eps-ladder 0.4:3") == 2);
  CHECK(cli("verify local-gb --space node --points 256 --abs-tol 0 --rel-tol 0 --nsigma 0") == 1);
}
