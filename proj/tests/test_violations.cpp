#include <set>

#include "doctest.h"
#include "tcda/error.hpp"
#include "tcda/violations.hpp"

using namespace tcda;

TEST_CASE("resolve examples") {
  CHECK(resolve("obs_add", 3).param("snr") == doctest::Approx(0.575));
  CHECK(resolve("stat", 4).param("resamples") == 4.0);
  CHECK(resolve("faith_lag", 5).param("distortion") == 0.0);
  CHECK(resolve("obs_add", 1, ScheduleVariant::appendix).param("snr") == 10.0);
  CHECK(resolve("length", 5).param("length") == 6.0);
  CHECK_THROWS_AS(resolve("obs_nope", 1), Error);
  CHECK_THROWS_AS(resolve("obs_add", 0), Error);
  CHECK_THROWS_AS(resolve("obs_add", 6), Error);
}

TEST_CASE("catalog covers 33 violations at five levels") {
  REQUIRE(violation_catalog().size() == 33);
  std::set<std::pair<std::string, int>> keys;
  for (const auto& row : schedule_table()) keys.insert({row.id, row.level});
  CHECK(keys.size() == 165);
  for (ScheduleVariant v : {ScheduleVariant::table, ScheduleVariant::appendix}) {
    for (const auto& info : violation_catalog()) {
      for (int level = 1; level <= 5; ++level) CHECK_FALSE(resolve(info.id, level, v).resolved.empty());
    }
  }
}

TEST_CASE("schedules move monotonically with the level") {
  for (ScheduleVariant v : {ScheduleVariant::table, ScheduleVariant::appendix}) {
    for (int level = 1; level < 5; ++level) {
      CHECK(resolve("obs_add", level + 1, v).param("snr") < resolve("obs_add", level, v).param("snr"));
      CHECK(resolve("conf_lag", level + 1, v).param("link_prob") > resolve("conf_lag", level, v).param("link_prob"));
      CHECK(resolve("faith_lag", level + 1, v).param("distortion") <
            resolve("faith_lag", level, v).param("distortion"));
      CHECK(resolve("mcar", level + 1, v).param("rate") > resolve("mcar", level, v).param("rate"));
    }
  }
}

TEST_CASE("compatible regimes") {
  CHECK(compatible_regimes(resolve("obs_add", 2)).size() == 16);
  const auto inst = compatible_regimes(resolve("faith_inst", 2));
  CHECK(inst.size() == 8);
  for (const auto& r : inst) CHECK(r.p_inst > 0.0);
  const auto len = compatible_regimes(resolve("length", 3));
  CHECK(len.size() == 8);
  for (const auto& r : len) CHECK(r.length == 41);
  CHECK(compatible_regimes(resolve("conf_inst", 1)).size() == 8);
}

TEST_CASE("composition") {
  const CompositeConfig com = compose({resolve("inno_com", 3), resolve("obs_com", 3)});
  CHECK(com.parts.size() == 2);
  CHECK(com.level() == 3);
  CHECK(com.find(Slot::inno) != nullptr);
  CHECK(com.find(Slot::obs) != nullptr);

  const CompositeConfig conf = compose({resolve("conf_inst", 2), resolve("conf_lag", 2)});
  CHECK(conf.parts.size() == 2);
  CHECK(compatible_regimes(conf).size() == 8);

  CHECK_THROWS_AS(compose({resolve("inno_uni", 1), resolve("inno_weib", 1)}), Error);
  CHECK_THROWS_AS(compose({resolve("obs_add", 1), resolve("mcar", 2)}), Error);
}

TEST_CASE("post-hoc transforms come after generation-time violations") {
  const CompositeConfig c = compose({resolve("mcar", 2), resolve("nl_mono", 2)});
  REQUIRE(c.parts.size() == 2);
  CHECK(c.parts[0].id == "nl_mono");
  CHECK(c.parts[1].id == "mcar");
}

TEST_CASE("empty periods use the explicit intervals") {
  const auto iv = empty_intervals(1, 250);
  REQUIRE(iv.size() == 2);
  CHECK(iv[0] == std::pair{40, 100});
  CHECK(iv[1] == std::pair{150, 210});
}

TEST_CASE("change points") {
  CHECK(stat_change_points(0, 250).empty());
  CHECK(stat_change_points(4, 250) == std::vector<int>{50, 100, 150, 200});
  CHECK(coef_change_points(1000) == std::vector<int>{200, 400, 600, 800});
}
