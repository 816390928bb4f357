// Copyright 2026 The UVMarvel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <random>

#include "corpus.hpp"
#include "oracles.hpp"
#include "uvmarvel/signal_tracker.hpp"
#include "uvmarvel/verilog_patcher.hpp"

namespace uvmarvel {
namespace {

using testing::corpus;

TEST(Corpus, SizeBounds) {
  auto designs = corpus();
  ASSERT_GE(designs.size(), 5u);
  for (const auto& d : designs) {
    DesignModel m = testing::load(d);
    EXPECT_GE(m.statements.size(), 60u) << d.name;
    EXPECT_LE(m.statements.size(), 500u) << d.name;
    EXPECT_GE(m.modules.size(), 2u) << d.name;
    EXPECT_LE(m.modules.size(), 10u) << d.name;
    EXPECT_TRUE(m.black_boxes.empty()) << d.name;
  }
}

TEST(Corpus, TraceMatchesFlatOracle) {
  std::mt19937 rng(424242);
  for (const auto& d : corpus()) {
    DesignModel m = testing::load(d);
    auto sigs = testing::touched_signals(m);
    for (int trial = 0; trial < 50; ++trial) {
      SeedSet seeds;
      std::size_t n = 1 + rng() % 3;
      while (seeds.signals.size() < n) seeds.signals.insert(sigs[rng() % sigs.size()]);
      auto slice = trace_cross_file(seeds, m);
      ASSERT_EQ(slice.all_statements(), oracle::flat_fixpoint(m, oracle::scoped(m, seeds)))
          << d.name << " trial " << trial;
    }
  }
}

TEST(Corpus, FeedbackLoopAcrossBoundariesTerminates) {
  auto designs = corpus();
  auto it = std::find_if(designs.begin(), designs.end(), [](const auto& d) { return d.name == "loopback"; });
  ASSERT_NE(it, designs.end());
  DesignModel m = testing::load(*it);
  auto slice = trace_cross_file(SeedSet{{{"arbiter", "grant", std::nullopt}}, std::nullopt}, m);
  // the busy flag computed in the tracker feeds back into the grant
  EXPECT_TRUE(slice.visited_signals.count({"tracker", "busy", std::nullopt}));
  EXPECT_TRUE(slice.visited_signals.count({"arbiter", "busy", std::nullopt}));
  EXPECT_TRUE(slice.statements_by_file.count("tracker"));
  std::set<SignalRef> seen;
  for (const auto& f : slice.iteration_frontiers) {
    for (const auto& s : f) EXPECT_TRUE(seen.insert(s).second) << s.module_name << "." << s.signal_name;
  }
}

TEST(Corpus, RenamedNetsThroughPositionalInstances) {
  auto designs = corpus();
  auto it = std::find_if(designs.begin(), designs.end(), [](const auto& d) { return d.name == "dualfifo"; });
  ASSERT_NE(it, designs.end());
  DesignModel m = testing::load(*it);
  const ModuleDef& top = m.module("dualfifo_top");
  std::size_t fifos = 0;
  for (const auto& inst : top.instances) {
    if (inst.child_module != "fifo") continue;
    ++fifos;
    for (const auto& b : inst.bindings) {
      EXPECT_TRUE(b.positional);
      EXPECT_FALSE(b.formal.empty());
    }
  }
  EXPECT_EQ(fifos, 2u);
  // rx_err -> frame_err -> in_data -> rxq_head -> fifo.rdata -> ... -> framer
  auto slice = trace_cross_file(SeedSet{{{"dualfifo_top", "rx_err", std::nullopt}}, std::nullopt}, m);
  EXPECT_TRUE(slice.statements_by_file.count("deframer"));
  EXPECT_TRUE(slice.statements_by_file.count("fifo"));
  EXPECT_TRUE(slice.statements_by_file.count("framer"));
  EXPECT_TRUE(slice.visited_signals.count({"framer", "dst_data", std::nullopt}));
}

}  // namespace
}  // namespace uvmarvel
