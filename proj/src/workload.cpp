#include "mrsim/workload.hpp"

#include <cmath>

#include "mrsim/rng.hpp"

namespace mrsim {

WorkloadSpec table1_workload() {
  WorkloadSpec spec;
  auto add = [&spec](UserId user, double mb, int maps) {
    Job j;
    j.id = static_cast<JobId>(spec.jobs.size());
    j.user = user;
    j.submit_time_s = 0;
    j.input_size_mb = mb;
    j.map_count = maps;
    j.reduce_count = 1;
    spec.jobs.push_back(j);
  };
  for (int i = 0; i < 3; ++i) add(0, 512, 14);
  for (int i = 0; i < 3; ++i) add(1, 1024, 16);
  for (int i = 0; i < 2; ++i) add(2, 2048, 32);
  spec.users = {{0, "user0"}, {1, "user1"}, {2, "user2"}};
  return spec;
}

std::vector<MapTask> split_job(Job& job,
                               std::vector<std::pair<BlockId, double>>& blocks,
                               TaskId* next_task_id, BlockId* next_block_id) {
  if (job.map_count < 1)
    throw ConfigError("job " + std::to_string(job.id) + ": map_count < 1");
  if (job.input_size_mb <= 0)
    throw ConfigError("job " + std::to_string(job.id) + ": input_size <= 0");

  const double head = std::ceil(job.input_size_mb / job.map_count);
  const double tail = job.input_size_mb - head * (job.map_count - 1);
  if (tail <= 0)
    throw ConfigError("job " + std::to_string(job.id) + ": input " +
                      std::to_string(job.input_size_mb) +
                      " MB cannot be cut into " +
                      std::to_string(job.map_count) + " non-empty blocks");

  std::vector<MapTask> tasks;
  tasks.reserve(job.map_count);
  job.input_blocks.clear();
  for (int i = 0; i < job.map_count; ++i) {
    const BlockId block = (*next_block_id)++;
    blocks.emplace_back(block, i + 1 < job.map_count ? head : tail);
    job.input_blocks.push_back(block);
    MapTask t;
    t.id = (*next_task_id)++;
    t.job = job.id;
    t.input_block = block;
    tasks.push_back(t);
  }
  return tasks;
}

WorkloadSpec synth_workload(const SynthParams& p, std::uint64_t seed) {
  if (p.n_jobs < 1) throw ConfigError("synth workload: n_jobs must be >= 1");
  if (p.min_size_mb <= 0 || p.max_size_mb < p.min_size_mb)
    throw ConfigError("synth workload: empty size range");
  if (p.min_maps < 1 || p.max_maps < p.min_maps)
    throw ConfigError("synth workload: empty map range");
  if (p.users < 1) throw ConfigError("synth workload: users must be >= 1");

  SeedStream stream(seed, "workload");
  WorkloadSpec spec;
  for (int i = 0; i < p.n_jobs; ++i) {
    Job j;
    j.id = i;
    j.user = i % p.users;
    j.submit_time_s = 0;
    const double raw = std::floor(
        p.min_size_mb + stream.next_unit() * (p.max_size_mb - p.min_size_mb));
    j.map_count = p.min_maps + static_cast<int>(stream.next_below(
                                   p.max_maps - p.min_maps + 1));
    // Round the size to a multiple of the map count so the ceil split always
    // yields map_count non-empty blocks.
    j.input_size_mb =
        std::max(1.0, std::floor(raw / j.map_count)) * j.map_count;
    j.reduce_count = p.reduces;
    spec.jobs.push_back(j);
  }
  for (int u = 0; u < p.users; ++u)
    spec.users[u] = "user" + std::to_string(u);
  return spec;
}

}  // namespace mrsim
