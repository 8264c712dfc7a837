#pragma once

#include "eogv/gate.hpp"
#include "eogv/gesture.hpp"
#include "eogv/pipeline.hpp"
#include "eogv/recording.hpp"

#include <string>
#include <vector>

namespace eogv {

// All formats are line-oriented text with a leading format/version line.
// Numbers are written in shortest round-trip form, so write -> read -> write
// reproduces the same bytes. Parse errors carry 1-based line numbers.

struct RecordingFile {
  Recording recording;
  std::string config_hash;  // may be empty
};

std::string format_recording(const Recording& rec, const std::string& config_hash = "");
RecordingFile parse_recording(const std::string& text);

std::string format_events(const std::vector<EventSpan>& events);
std::vector<EventSpan> parse_events(const std::string& text);

std::string format_detections(const std::vector<Detection>& dets, const std::string& config_hash = "");
std::vector<Detection> parse_detections(const std::string& text);
// One detection as emitted on the live event stream.
std::string format_detection_line(const Detection& d);

struct GateModelFile {
  ArtifactModel model;
  std::string config_hash;
};

struct ForestModelFile {
  ForestModel model;
  std::string config_hash;
};

std::string format_gate_model(const ArtifactModel& m, const std::string& config_hash);
GateModelFile parse_gate_model(const std::string& text);
std::string format_forest_model(const ForestModel& m, const std::string& config_hash);
ForestModelFile parse_forest_model(const std::string& text);

// Reads the `kind` line of a model file without parsing the rest.
std::string model_kind(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

} // namespace eogv
