#include <gtest/gtest.h>

#include <filesystem>

#include "pktsched/io.hpp"

using namespace pktsched;

namespace {

std::string data(const char* name) { return std::string(PKTSCHED_DATA_DIR) + "/" + name; }

}  // namespace

TEST(InstanceJson, DecimalLiteralsRoundTrip) {
  const std::string text =
      R"({"s_bound":2,"packets":[{"id":0,"r":1,"d":2,"w":0.1},{"id":1,"r":2,"d":2,"w":1.618033988749895}]})";
  const Instance inst = instance_from_json(Json::parse(text));
  EXPECT_EQ(to_json(inst).dump(), text);
}

TEST(InstanceJson, RejectsMalformedInput) {
  EXPECT_THROW(instance_from_json(Json::parse(R"({"packets":[{"id":0,"r":1}]})")), Error);
  EXPECT_THROW(instance_from_json(Json::parse(R"({"packets":[{"id":0,"r":3,"d":1,"w":1}]})")), Error);
  EXPECT_THROW(instance_from_json(Json::parse(R"({"packets":[{"id":0,"r":1,"d":1,"w":1,"synthetic":true}]})")),
               Error);
  EXPECT_THROW(read_instance("/no/such/file.json"), Error);
}

TEST(InstanceJson, BundledFixturesLoad) {
  const Instance s3 = read_instance(data("paper_s3.json"));
  EXPECT_EQ(s3.size(), 4u);
  EXPECT_EQ(s3.s_bound(), 4);
  const Instance w = read_instance(data("edf_phi_4bounded_witness.json"));
  EXPECT_TRUE(w.is_s_bounded(4));
}

TEST(ScheduleJson, RoundTrip) {
  Schedule s;
  s.assign(3, 7);
  s.assign(-1, 2);
  const Json j = to_json(s);
  EXPECT_EQ(j.dump(), R"({"slots":{"-1":2,"3":7}})");
  EXPECT_EQ(schedule_from_json(j), s);
  EXPECT_THROW(schedule_from_json(Json::parse(R"({"slots":{"x":1}})")), Error);
}

TEST(TraceJson, RoundTripKeepsEverything) {
  for (const char* spec : {"toggleh", "lcalpha", "edf:phi"}) {
    const Instance inst = gen_random_sbounded(5, 12, 2, 6);
    auto policy = make_policy(spec);
    const Trace tr = run(*policy, inst, 1);
    const Json j = to_json(tr);
    const Trace back = trace_from_json(j);
    EXPECT_EQ(to_json(back).dump(), j.dump()) << spec;
    EXPECT_EQ(back.weight(), tr.weight());
    EXPECT_EQ(back.schedule(), tr.schedule());
  }
}

TEST(TraceJson, StepKindNames) {
  EXPECT_EQ(step_kind_from("f-step"), StepKind::f_step);
  EXPECT_EQ(step_kind_from("scheduled-p2"), StepKind::plan_second);
  EXPECT_THROW(step_kind_from("x-step"), Error);
}

TEST(Files, WriteThenRead) {
  const auto path = std::filesystem::temp_directory_path() / "pktsched_io_test.json";
  const Instance inst = gen_random_sbounded(9, 5, 3, 4);
  write_json_file(path.string(), to_json(inst));
  EXPECT_EQ(to_json(read_instance(path.string())).dump(), to_json(inst).dump());
  std::filesystem::remove(path);
}

TEST(Reports, ConstantsAreCarried) {
  const Json c = constants_json();
  EXPECT_EQ(c["phi"].get<double>(), kPhi);
  EXPECT_EQ(c["lc_ratio"].get<double>(), lc_constants().ratio);
  EXPECT_EQ(c["lb_ratio"].get<double>(), (1.0 + std::sqrt(17.0)) / 4.0);
}
