#pragma once

#include <string>
#include <vector>

#include "seqjsp/schedule.hpp"

namespace seqjsp {

struct GanttBox {
  int job;
  int pos;
  int start;
  int end;
};

/// One row per machine, boxes sorted by start.
struct GanttLayout {
  int horizon = 0;
  std::vector<std::vector<GanttBox>> rows;
};

GanttLayout gantt_layout(const Schedule& s);

std::string render_gantt_svg(const Schedule& s);

/// Aligned text chart; one character per time unit, or per `ceil(horizon / max_width)`
/// units for long horizons. Idle time is '.', jobs are 0-9, A-Z, a-z.
std::string render_gantt_text(const Schedule& s, int max_width = 100);

}  // namespace seqjsp
