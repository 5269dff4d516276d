"""
Workflow Manager for the Annuli Pipeline

Manages workflow state, progress counters and statistics across pipeline
execution. All mutation goes through a lock, so agent worker threads may
report progress concurrently.
"""

import hashlib
import json
import threading
from collections import defaultdict
from datetime import datetime
from typing import Any, Dict, Optional


def workflow_id_for(config: Dict[str, Any]) -> str:
    """Deterministic workflow ID: SHA-256 prefix of the canonical config JSON."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


class WorkflowManager:
    """
    Manages workflow state and statistics.
    """

    def __init__(self):
        """Initialize workflow manager."""
        self._lock = threading.Lock()
        self.workflows = {}
        self.statistics = defaultdict(int)

    def create_workflow(self, config: Dict[str, Any], total: Optional[int] = None) -> str:
        """
        Create a new workflow.

        Args:
            config: Resolved configuration the ID is derived from
            total: Expected number of progress units, if known

        Returns:
            Workflow ID
        """
        workflow_id = workflow_id_for(config)
        with self._lock:
            self.workflows[workflow_id] = {
                'id': workflow_id,
                'status': 'created',
                'created_at': datetime.now().isoformat(),
                'completed_at': None,
                'error': None,
                'progress': 0,
                'total': total,
            }
            self.statistics['total'] += 1
        return workflow_id

    def update_workflow(
        self,
        workflow_id: str,
        status: str,
        metadata: Optional[Dict[str, Any]] = None
    ):
        """
        Update workflow status.

        Args:
            workflow_id: Workflow ID
            status: New status
            metadata: Optional metadata to add
        """
        with self._lock:
            if workflow_id in self.workflows:
                self.workflows[workflow_id]['status'] = status
                if metadata:
                    self.workflows[workflow_id].update(metadata)

    def advance(self, workflow_id: str, units: int = 1):
        """Add finished units to a workflow's progress counter."""
        with self._lock:
            if workflow_id in self.workflows:
                self.workflows[workflow_id]['progress'] += int(units)

    def progress_callback(self, workflow_id: str):
        """A callable suitable for agents' on_progress hooks."""
        return lambda units: self.advance(workflow_id, units)

    def complete_workflow(
        self,
        workflow_id: str,
        status: str = 'completed',
        error: Optional[str] = None
    ):
        """
        Mark workflow as completed.

        Args:
            workflow_id: Workflow ID
            status: Completion status
            error: Optional error message
        """
        with self._lock:
            if workflow_id in self.workflows:
                self.workflows[workflow_id]['status'] = status
                self.workflows[workflow_id]['completed_at'] = datetime.now().isoformat()
                if error:
                    self.workflows[workflow_id]['error'] = error

                self.statistics[status] += 1

    def get_workflow(self, workflow_id: str) -> Optional[Dict[str, Any]]:
        """
        Get workflow information.

        Args:
            workflow_id: Workflow ID

        Returns:
            Copy of the workflow dictionary or None
        """
        with self._lock:
            workflow = self.workflows.get(workflow_id)
            return dict(workflow) if workflow else None

    def get_statistics(self) -> Dict[str, Any]:
        """
        Get workflow statistics.

        Returns:
            Statistics dictionary
        """
        with self._lock:
            return {
                'total': self.statistics['total'],
                'success': self.statistics.get('success', 0),
                'checks_failed': self.statistics.get('checks_failed', 0),
                'error': self.statistics.get('error', 0),
                'active_workflows': len([w for w in self.workflows.values()
                                         if w['status'] not in ['success', 'checks_failed', 'error']])
            }
