#pragma once

#include <memory>
#include <string>

#include "proxkit/service.hpp"

namespace proxkit::http {

/// HTTP + JSON front end for an AnnotationService.
///
///   POST /sessions                         create a session
///   GET  /sessions/{id}/frames/{index}     frame image bytes
///   GET  /sessions/{id}/next?coder=&pass=  next unlabeled unit
///   POST /sessions/{id}/labels             record a label
///   POST /sessions/{id}/notes              attach a note to a label
///   GET  /sessions/{id}/progress           labeled/total per track
///   GET  /sessions/{id}/export?coder=&pass=       annotation CSV
///   GET  /sessions/{id}/export/meta?coder=&pass=  sidecar text
///
/// Errors come back as {"error": "<Code>", "message": "..."} with 400 for
/// malformed requests, 404 for unknown sessions, frames, tracks or labels,
/// 409 for a duplicate session and 422 for invalid content.
class ApiServer {
 public:
  explicit ApiServer(AnnotationService& service);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds without serving. Port 0 picks a free port; returns the bound
  /// port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after bind().
  bool listen_after_bind();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// HTTP status for a service error code.
int status_for(Errc code) noexcept;

}  // namespace proxkit::http
