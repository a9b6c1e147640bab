#include <gtest/gtest.h>

#include <filesystem>

#include "v2x/checkpoint.hpp"
#include "v2x/error.hpp"

using namespace v2x;

namespace {

Checkpoint sample(std::uint64_t seed) {
  Rng rng(seed);
  const auto a = make_architecture(4, 3, 1, ConvSpec{2, 4, 1}, {8, 6}, 4);
  const auto c = make_architecture(4, 3, 1, ConvSpec{2, 4, 1}, {8, 6}, 1);
  Checkpoint ck;
  ck.seed = seed;
  for (int b = 0; b < 3; ++b) ck.agents.push_back(init_agent(a, c, rng));
  quantize_to_float(ck.agents);
  return ck;
}

ErrorKind kind_of(const std::vector<std::uint8_t>& bytes) {
  try {
    deserialize_checkpoint(bytes);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInvalidArgument;
}

}  // namespace

TEST(Checkpoint, RoundTripIsExact) {
  const auto ck = sample(11);
  const auto bytes = serialize_checkpoint(ck);
  const auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.seed, 11u);
  ASSERT_EQ(back.agents.size(), 3u);
  for (std::size_t b = 0; b < 3; ++b) {
    EXPECT_EQ(back.agents[b].actor, ck.agents[b].actor);
    EXPECT_EQ(back.agents[b].critic, ck.agents[b].critic);
    EXPECT_EQ(back.agents[b].actor_arch.param_count(), ck.agents[b].actor_arch.param_count());
  }
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "v2x_ckpt_test.ckpt";
  const auto ck = sample(12);
  save_checkpoint(path, ck);
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(path)), serialize_checkpoint(ck));
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), Error);
}

TEST(Checkpoint, CorruptionDetected) {
  const auto bytes = serialize_checkpoint(sample(13));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of(bad_magic), ErrorKind::kFormatMismatch);
  for (std::size_t at : {std::size_t{8}, bytes.size() / 2, bytes.size() - 12}) {
    auto flipped = bytes;
    flipped[at] ^= 0x40;
    EXPECT_EQ(kind_of(flipped), ErrorKind::kFormatMismatch) << at;
  }
  auto truncated = bytes;
  truncated.resize(bytes.size() - 5);
  EXPECT_EQ(kind_of(truncated), ErrorKind::kFormatMismatch);
  EXPECT_EQ(kind_of({}), ErrorKind::kFormatMismatch);
}

TEST(Checkpoint, Compatibility) {
  const auto ck = sample(14);
  const auto& a = ck.agents[0].actor_arch;
  const auto& c = ck.agents[0].critic_arch;
  EXPECT_NO_THROW(check_compatible(ck, 3, a, c));
  auto expect_shape = [&](auto fn) {
    try {
      fn();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kShapeMismatch);
    }
  };
  expect_shape([&] { check_compatible(ck, 2, a, c); });
  const auto wider = make_architecture(4, 3, 1, ConvSpec{2, 4, 1}, {16, 6}, 4);
  expect_shape([&] { check_compatible(ck, 3, wider, c); });
}

TEST(Checkpoint, Fnv1aReference) {
  EXPECT_EQ(fnv1a64(nullptr, 0), 0xcbf29ce484222325ull);
  const std::uint8_t a[] = {'a'};
  EXPECT_EQ(fnv1a64(a, 1), 0xaf63dc4c8601ec8cull);
}
