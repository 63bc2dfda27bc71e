#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrsim/types.hpp"

namespace mrsim {

enum class TaskState { NotRunning, Running, Succeeded, FailedPendingRetry };

struct Job {
  JobId id = kInvalidId;
  UserId user = 0;
  double submit_time_s = 0;
  double input_size_mb = 0;
  int map_count = 0;
  int reduce_count = 0;
  std::vector<BlockId> input_blocks;  // filled by split_job, one per map task
};

struct MapTask {
  TaskId id = kInvalidId;
  JobId job = kInvalidId;
  BlockId input_block = kInvalidId;
  TaskState state = TaskState::NotRunning;
};

struct WorkloadSpec {
  std::vector<Job> jobs;                 // ordered by submission
  std::map<UserId, std::string> users;  // user -> queue/pool name
};

// The eight-job WordCount scenario: three users submitting 3x512MB/14-map,
// 3x1024MB/16-map and 2x2048MB/32-map jobs simultaneously, one reduce each.
WorkloadSpec table1_workload();

// Cuts a job's input into map_count blocks: the first map_count-1 get
// ceil(input/map_count) MB and the last one the remainder. Appends the new
// block declarations to `blocks` and returns one MapTask per block.
// Ids are assigned sequentially from *next_task_id / *next_block_id.
std::vector<MapTask> split_job(Job& job,
                               std::vector<std::pair<BlockId, double>>& blocks,
                               TaskId* next_task_id, BlockId* next_block_id);

struct SynthParams {
  int n_jobs = 1;
  double min_size_mb = 256;
  double max_size_mb = 2048;
  int min_maps = 4;
  int max_maps = 32;
  int users = 1;
  int reduces = 1;
};

// Seeded random workload for sweeps beyond the built-in one. Draws from the
// "workload" stream: per job, raw = floor(min + unit()*(max-min)) MB,
// maps = min + below(max-min+1), size = max(1, floor(raw/maps))*maps so the
// split always yields `maps` non-empty blocks, user = job index mod users.
WorkloadSpec synth_workload(const SynthParams& params, std::uint64_t seed);

}  // namespace mrsim
